"""Differentiable float64 kernels with hand-derived backward passes.

Every ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
takes the upstream gradient and that cache, accumulates into the ``grad`` of
any :class:`Param` involved and returns the gradient for the input. Backward
calls must run in exact reverse order of the forward calls that produced
their caches.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.errors import (
    AllPositionsMaskedError,
    IdOutOfRangeError,
    NonFiniteValueError,
    ShapeMismatchError,
)

DTYPE = np.float64


@dataclass(eq=False)
class Param:
    """A named trainable matrix and its accumulated gradient."""

    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        value = np.asarray(self.value, dtype=DTYPE)
        if value.ndim == 1:
            value = value.reshape(1, -1)
        if value.ndim != 2:
            raise ShapeMismatchError(f"Param {self.name} must be 2-D, got shape {value.shape}")
        self.value = np.ascontiguousarray(value)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape  # type: ignore[return-value]

    @property
    def size(self) -> int:
        return int(self.value.size)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def as_tensor(x: Any) -> np.ndarray:
    """Coerce ``x`` to a 2-D float64 array (a row vector when 1-D)."""
    arr = np.asarray(x, dtype=DTYPE)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D tensor, got shape {arr.shape}")
    return arr


def check_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteValueError(f"{what} contains NaN or infinite values")


# --- linear -----------------------------------------------------------------


def linear_forward(x: np.ndarray, w: Param, b: Param) -> tuple[np.ndarray, tuple]:
    """y = x W + b for x of shape (n, d_in)."""
    x = as_tensor(x)
    d_in, d_out = w.shape
    if x.shape[1] != d_in:
        raise ShapeMismatchError(f"{w.name}: input width {x.shape[1]} != {d_in}")
    if b.shape != (1, d_out):
        raise ShapeMismatchError(f"{b.name}: bias shape {b.shape} != (1, {d_out})")
    y = x @ w.value + b.value
    return y, (x, w, b)


def linear_backward(dy: np.ndarray, cache: tuple) -> np.ndarray:
    x, w, b = cache
    w.grad += x.T @ dy
    b.grad += dy.sum(axis=0, keepdims=True)
    return dy @ w.value.T


# --- embedding --------------------------------------------------------------


def embedding_lookup(ids: Sequence[int], table: Param) -> tuple[np.ndarray, tuple]:
    """Gather rows of ``table``; row i of the output is ``table[ids[i]]``."""
    index = np.asarray(ids, dtype=np.int64).reshape(-1)
    rows = table.shape[0]
    for i in index:
        if not 0 <= i < rows:
            raise IdOutOfRangeError(int(i), rows)
    return table.value[index].copy(), (index, table)


def embedding_backward(dy: np.ndarray, cache: tuple) -> None:
    index, table = cache
    # scatter-add so repeated ids accumulate
    np.add.at(table.grad, index, dy)


# --- activations ------------------------------------------------------------


def relu_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    active = x > 0.0
    return np.where(active, x, 0.0), active


def relu_backward(dy: np.ndarray, active: np.ndarray) -> np.ndarray:
    return np.where(active, dy, 0.0)


def tanh_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.tanh(x)
    return y, y


def tanh_backward(dy: np.ndarray, y: np.ndarray) -> np.ndarray:
    return dy * (1.0 - y * y)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Overflow-free logistic function."""
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def softmax_rows(scores: np.ndarray, key_mask: np.ndarray | None = None) -> np.ndarray:
    """Softmax over the last axis; keys where ``key_mask`` is False get weight 0."""
    if key_mask is not None:
        scores = np.where(key_mask, scores, -np.inf)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=-1, keepdims=True)


# --- layer normalisation ----------------------------------------------------


def layer_norm_forward(
    x: np.ndarray, gain: Param, bias: Param, eps: float = 1e-5
) -> tuple[np.ndarray, tuple]:
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean) * inv_std
    return x_hat * gain.value + bias.value, (x_hat, inv_std, gain, bias)


def layer_norm_backward(dy: np.ndarray, cache: tuple) -> np.ndarray:
    x_hat, inv_std, gain, bias = cache
    gain.grad += (dy * x_hat).sum(axis=0, keepdims=True)
    bias.grad += dy.sum(axis=0, keepdims=True)
    dx_hat = dy * gain.value
    return inv_std * (
        dx_hat
        - dx_hat.mean(axis=1, keepdims=True)
        - x_hat * (dx_hat * x_hat).mean(axis=1, keepdims=True)
    )


# --- multi-head self-attention ----------------------------------------------


@dataclass(eq=False)
class AttentionParams:
    """Query/key/value/output projections, each d x d with a 1 x d bias.

    Head h owns columns ``h*d_k:(h+1)*d_k`` of the query, key and value
    projections, so the three d x d matrices hold every per-head projection.
    """

    wq: Param
    bq: Param
    wk: Param
    bk: Param
    wv: Param
    bv: Param
    wo: Param
    bo: Param

    def parameters(self) -> list[Param]:
        return [self.wq, self.bq, self.wk, self.bk, self.wv, self.bv, self.wo, self.bo]


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    length, width = x.shape
    return x.reshape(length, heads, width // heads).transpose(1, 0, 2)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    heads, length, d_k = x.shape
    return x.transpose(1, 0, 2).reshape(length, heads * d_k)


def attention_forward(
    x: np.ndarray,
    params: AttentionParams,
    heads: int,
    key_mask: Sequence[bool] | np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Scaled dot-product self-attention with a residual connection.

    Args:
        x: Sequence of shape (L, d).
        params: Projection parameters.
        heads: Number of heads; must divide d.
        key_mask: Length-L booleans, True for positions that may be attended.

    Returns:
        ``(x + attended, weights, cache)`` where ``weights`` has shape (heads, L, L).
    """
    x = as_tensor(x)
    length, width = x.shape
    if heads < 1 or width % heads:
        raise ShapeMismatchError(f"width {width} is not divisible by {heads} heads")
    if params.wq.shape != (width, width):
        raise ShapeMismatchError(f"attention projections expect width {params.wq.shape[0]}")

    mask = np.ones(length, dtype=bool) if key_mask is None else np.asarray(key_mask, dtype=bool)
    if mask.shape != (length,):
        raise ShapeMismatchError(f"mask of length {mask.shape} for a sequence of {length}")
    if not mask.any():
        raise AllPositionsMaskedError()

    scale = 1.0 / np.sqrt(width // heads)
    q = x @ params.wq.value + params.bq.value
    k = x @ params.wk.value + params.bk.value
    v = x @ params.wv.value + params.bv.value
    qh, kh, vh = _split_heads(q, heads), _split_heads(k, heads), _split_heads(v, heads)

    scores = (qh @ kh.transpose(0, 2, 1)) * scale
    weights = softmax_rows(scores, mask[None, None, :])
    context = _merge_heads(weights @ vh)
    attended = context @ params.wo.value + params.bo.value

    cache = (x, qh, kh, vh, weights, context, params, heads, scale)
    return x + attended, weights, cache


def attention_backward(dy: np.ndarray, cache: tuple) -> np.ndarray:
    x, qh, kh, vh, weights, context, params, heads, scale = cache

    params.wo.grad += context.T @ dy
    params.bo.grad += dy.sum(axis=0, keepdims=True)
    d_context = _split_heads(dy @ params.wo.value.T, heads)

    d_weights = d_context @ vh.transpose(0, 2, 1)
    dvh = weights.transpose(0, 2, 1) @ d_context
    # softmax Jacobian; masked keys have zero weight and so zero gradient
    d_scores = weights * (d_weights - (d_weights * weights).sum(axis=-1, keepdims=True))
    d_scores *= scale
    dqh = d_scores @ kh
    dkh = d_scores.transpose(0, 2, 1) @ qh

    dx = dy.copy()
    for grad_h, w, b in (
        (dqh, params.wq, params.bq),
        (dkh, params.wk, params.bk),
        (dvh, params.wv, params.bv),
    ):
        grad = _merge_heads(grad_h)
        w.grad += x.T @ grad
        b.grad += grad.sum(axis=0, keepdims=True)
        dx += grad @ w.value.T
    return dx


# --- loss -------------------------------------------------------------------


def bce_with_logits(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy over every cell, from raw logits.

    Uses ``max(z, 0) - z*t + log(1 + exp(-|z|))`` so large logits never
    overflow. Returns the loss and its gradient with respect to ``logits``.
    """
    z = as_tensor(logits)
    t = as_tensor(targets)
    if z.shape != t.shape:
        raise ShapeMismatchError(f"logits {z.shape} vs targets {t.shape}")
    cells = np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))
    grad = (sigmoid(z) - t) / z.size
    return float(cells.mean()), grad
