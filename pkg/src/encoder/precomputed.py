"""Frozen encoder backed by vectors produced offline."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from src.encoder.base import TextRepresentation
from src.errors import (
    DimensionMismatchError,
    DuplicateDocIdError,
    MalformedLineError,
    MissingFileError,
    UnknownDocIdError,
)
from src.numerics.kernels import Param

logger = logging.getLogger(__name__)


class PrecomputedEncoder:
    """Resolves doc_id -> stored vector. No parameters, no gradient flow."""

    trainable = False

    def __init__(self, vectors: Mapping[str, np.ndarray], d_model: int, source: str | None = None):
        self._vectors: dict[str, np.ndarray] = {}
        for doc_id, vector in vectors.items():
            row = np.asarray(vector, dtype=np.float64).reshape(1, -1)
            if row.shape[1] != d_model:
                raise DimensionMismatchError(d_model, row.shape[1], where=f"vector {doc_id!r}")
            row.setflags(write=False)
            self._vectors[doc_id] = row
        self._d_model = d_model
        self.source = source

    @classmethod
    def from_vectors(cls, vectors: Mapping[str, np.ndarray]) -> PrecomputedEncoder:
        """Build from an in-memory mapping; d_model is taken from the first vector."""
        first = next(iter(vectors.values()))
        return cls(vectors, d_model=int(np.asarray(first).size))

    @property
    def d_model(self) -> int:
        return self._d_model

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._vectors

    def lookup(self, doc_id: str) -> np.ndarray:
        try:
            return self._vectors[doc_id]
        except KeyError:
            raise UnknownDocIdError(doc_id) from None

    def encode(self, doc_id: str, text: str = "") -> TextRepresentation:
        return TextRepresentation(doc_id=doc_id, vector=self.lookup(doc_id).copy())

    def backward(self, d_vector: np.ndarray) -> None:
        return None

    def parameters(self) -> list[Param]:
        return []


def load_precomputed_vectors(path: str | Path, d_model: int) -> PrecomputedEncoder:
    """Read ``{"id": ..., "vector": [...]}`` JSON lines into a frozen encoder."""
    vectors_path = Path(path)
    if not vectors_path.is_file():
        raise MissingFileError(vectors_path)

    vectors: dict[str, np.ndarray] = {}
    with open(vectors_path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                doc_id = str(record["id"])
                vector = np.asarray(record["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedLineError(line_no, str(exc)) from exc
            if vector.ndim != 1:
                raise MalformedLineError(line_no, "vector must be a flat list of numbers")
            if vector.size != d_model:
                raise DimensionMismatchError(d_model, vector.size, where=f"line {line_no}")
            if doc_id in vectors:
                raise DuplicateDocIdError(doc_id)
            vectors[doc_id] = vector

    logger.info("Loaded %d precomputed vectors (d=%d) from %s", len(vectors), d_model, vectors_path)
    return PrecomputedEncoder(vectors, d_model, source=str(vectors_path))
