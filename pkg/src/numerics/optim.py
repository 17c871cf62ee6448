"""AdamW with decoupled weight decay."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from src.errors import ShapeMismatchError
from src.numerics.kernels import Param

logger = logging.getLogger(__name__)


@dataclass
class AdamWState:
    """First/second moments per parameter plus the optimizer scalars."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.t < 0:
            raise ValueError("step counter must be >= 0")

    @classmethod
    def for_params(cls, params: list[Param], lr: float, **scalars: float) -> AdamWState:
        state = cls(lr=lr, **scalars)
        state.m = [np.zeros_like(p.value) for p in params]
        state.v = [np.zeros_like(p.value) for p in params]
        return state


def adamw_step(params: list[Param], state: AdamWState) -> None:
    """Apply one AdamW update in place, then zero every gradient.

    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * theta
    """
    if len(state.m) != len(params) or len(state.v) != len(params):
        raise ShapeMismatchError(
            f"optimizer tracks {len(state.m)} moments for {len(params)} parameters"
        )
    for p, m, v in zip(params, state.m, state.v):
        if m.shape != p.shape or v.shape != p.shape:
            raise ShapeMismatchError(f"moment shape {m.shape} != parameter {p.name} {p.shape}")

    state.t += 1
    bias1 = 1.0 - state.beta1**state.t
    bias2 = 1.0 - state.beta2**state.t
    for p, m, v in zip(params, state.m, state.v):
        g = p.grad
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        decay = state.lr * state.weight_decay * p.value
        p.value -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps) + decay
        p.zero_grad()


class AdamW:
    """Optimizer bound to a fixed parameter list."""

    def __init__(
        self,
        params: list[Param],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ) -> None:
        self.params = params
        self.state = AdamWState.for_params(
            params, lr, beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay
        )
        logger.debug("AdamW over %d tensors, lr=%g", len(params), lr)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        adamw_step(self.params, self.state)
