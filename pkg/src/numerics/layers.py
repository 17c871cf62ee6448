"""Stateful layers built on the functional kernels.

Each layer remembers the cache of its most recent forward call, so a forward
must be followed by its backward before the layer is run again.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from src.numerics.kernels import (
    AttentionParams,
    Param,
    attention_backward,
    attention_forward,
    embedding_backward,
    embedding_lookup,
    layer_norm_backward,
    layer_norm_forward,
    linear_backward,
    linear_forward,
    relu_backward,
    relu_forward,
)

EMBEDDING_INIT_SCALE = 0.05


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def embedding_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.uniform(-EMBEDDING_INIT_SCALE, EMBEDDING_INIT_SCALE, size=(rows, cols))


class Layer:
    """Base class: a named group of parameters."""

    def parameters(self) -> list[Param]:
        raise NotImplementedError


class Linear(Layer):
    """Affine map ``x W + b`` with Xavier-initialised weights and zero bias."""

    def __init__(self, name: str, d_in: int, d_out: int, rng: np.random.Generator) -> None:
        self.weight = Param(f"{name}.weight", xavier_uniform(rng, d_in, d_out))
        self.bias = Param(f"{name}.bias", np.zeros((1, d_out)))
        self._cache: tuple | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, self._cache = linear_forward(x, self.weight, self.bias)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return linear_backward(dy, self._cache)

    def parameters(self) -> list[Param]:
        return [self.weight, self.bias]


class Embedding(Layer):
    """Lookup table with rows drawn from uniform(-0.05, 0.05)."""

    def __init__(self, name: str, rows: int, dim: int, rng: np.random.Generator) -> None:
        self.table = Param(f"{name}.table", embedding_uniform(rng, rows, dim))
        self._cache: tuple | None = None

    @property
    def rows(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def forward(self, ids: Sequence[int]) -> np.ndarray:
        out, self._cache = embedding_lookup(ids, self.table)
        return out

    def backward(self, dy: np.ndarray) -> None:
        embedding_backward(dy, self._cache)

    def parameters(self) -> list[Param]:
        return [self.table]


class LayerNorm(Layer):
    def __init__(self, name: str, dim: int) -> None:
        self.gain = Param(f"{name}.gain", np.ones((1, dim)))
        self.bias = Param(f"{name}.bias", np.zeros((1, dim)))
        self._cache: tuple | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, self._cache = layer_norm_forward(x, self.gain, self.bias)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return layer_norm_backward(dy, self._cache)

    def parameters(self) -> list[Param]:
        return [self.gain, self.bias]


class FeedForward(Layer):
    """Position-wise ``x + W2 relu(W1 x)``."""

    def __init__(self, name: str, dim: int, hidden: int, rng: np.random.Generator) -> None:
        self.inner = Linear(f"{name}.inner", dim, hidden, rng)
        self.outer = Linear(f"{name}.outer", hidden, dim, rng)
        self._active: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        hidden, self._active = relu_forward(self.inner.forward(x))
        return x + self.outer.forward(hidden)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        d_hidden = relu_backward(self.outer.backward(dy), self._active)
        return dy + self.inner.backward(d_hidden)

    def parameters(self) -> list[Param]:
        return self.inner.parameters() + self.outer.parameters()


class SelfAttention(Layer):
    """Multi-head self-attention with residual, weights Xavier-initialised."""

    def __init__(self, name: str, dim: int, heads: int, rng: np.random.Generator) -> None:
        self.heads = heads
        projections = {}
        for key in ("q", "k", "v", "o"):
            projections[f"w{key}"] = Param(f"{name}.w{key}", xavier_uniform(rng, dim, dim))
            projections[f"b{key}"] = Param(f"{name}.b{key}", np.zeros((1, dim)))
        self.params = AttentionParams(**projections)
        self.last_weights: np.ndarray | None = None
        self._cache: tuple | None = None

    def forward(self, x: np.ndarray, key_mask: Sequence[bool] | None = None) -> np.ndarray:
        y, self.last_weights, self._cache = attention_forward(
            x, self.params, self.heads, key_mask
        )
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return attention_backward(dy, self._cache)

    def parameters(self) -> list[Param]:
        return self.params.parameters()


class TransformerBlock(Layer):
    """Self-attention with optional post-norm and position-wise FFN sub-block.

    With both options off the block is exactly ``x + attention(x)``.
    """

    def __init__(
        self,
        name: str,
        dim: int,
        heads: int,
        rng: np.random.Generator,
        layer_norm: bool = False,
        feed_forward: bool = False,
        ffn_hidden: int | None = None,
    ) -> None:
        self.attention = SelfAttention(f"{name}.attn", dim, heads, rng)
        self.norm1 = LayerNorm(f"{name}.norm1", dim) if layer_norm else None
        self.ffn = (
            FeedForward(f"{name}.ffn", dim, ffn_hidden or 2 * dim, rng) if feed_forward else None
        )
        self.norm2 = LayerNorm(f"{name}.norm2", dim) if layer_norm and feed_forward else None

    @property
    def last_weights(self) -> np.ndarray | None:
        return self.attention.last_weights

    def _stages(self) -> list[Layer]:
        return [s for s in (self.norm1, self.ffn, self.norm2) if s is not None]

    def forward(self, x: np.ndarray, key_mask: Sequence[bool] | None = None) -> np.ndarray:
        y = self.attention.forward(x, key_mask)
        for stage in self._stages():
            y = stage.forward(y)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        for stage in reversed(self._stages()):
            dy = stage.backward(dy)
        return self.attention.backward(dy)

    def parameters(self) -> list[Param]:
        params = self.attention.parameters()
        for stage in self._stages():
            params.extend(stage.parameters())
        return params
