"""The text encoder interface."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from src.numerics.kernels import Param, as_tensor, check_finite


@dataclass(frozen=True)
class TextRepresentation:
    """Pooled whole-text vector, stored as a 1 x d_model row."""

    doc_id: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        row = as_tensor(self.vector)
        if row.shape[0] != 1:
            raise ValueError(f"expected a single row, got shape {row.shape}")
        check_finite(row, f"representation of {self.doc_id!r}")
        object.__setattr__(self, "vector", row)

    @property
    def d_model(self) -> int:
        return self.vector.shape[1]


@runtime_checkable
class TextEncoder(Protocol):
    """Produces a pooled representation per document.

    ``backward`` receives the gradient of the loss with respect to the last
    returned vector; frozen encoders ignore it.
    """

    @property
    def d_model(self) -> int: ...

    @property
    def trainable(self) -> bool: ...

    def encode(self, doc_id: str, text: str) -> TextRepresentation: ...

    def backward(self, d_vector: np.ndarray) -> None: ...

    def parameters(self) -> list[Param]: ...
