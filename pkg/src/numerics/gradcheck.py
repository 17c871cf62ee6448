"""Central finite-difference gradient checker."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from src.errors import NonFiniteValueError
from src.numerics.kernels import Param

logger = logging.getLogger(__name__)


def grad_check(
    objective: Callable[[], float],
    params: list[Param],
    eps: float = 1e-5,
    floor: float = 1e-8,
) -> float:
    """Compare analytic gradients against central differences.

    ``objective`` must run the forward pass, accumulate gradients into
    ``params`` via the backward pass and return the scalar loss. The
    relative error per element is ``|a - n| / max(|a|, |n|, floor)``. Raising ``floor``
    above the 1e-8 default bounds the score of elements whose true gradient
    is smaller than the finite-difference round-off.

    Returns:
        The maximum relative error over every parameter element.
    """
    for p in params:
        p.zero_grad()
    base = objective()
    if not np.isfinite(base):
        raise NonFiniteValueError("objective is not finite at the unperturbed point")
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.value.reshape(-1)
        numeric = np.empty(flat.size)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = objective()
            flat[i] = original - eps
            minus = objective()
            flat[i] = original
            if not (np.isfinite(plus) and np.isfinite(minus)):
                raise NonFiniteValueError(f"objective not finite when perturbing {p.name}[{i}]")
            numeric[i] = (plus - minus) / (2.0 * eps)

        a = grad.reshape(-1)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), floor)
        err = float(np.max(np.abs(a - numeric) / denom)) if a.size else 0.0
        logger.debug("grad check %s: max relative error %.3e", p.name, err)
        worst = max(worst, err)

    for p in params:
        p.zero_grad()
    return worst
