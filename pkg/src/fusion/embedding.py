"""Regex feature embeddings: ordinary (padded sequence) and bagged (mean)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.errors import ShapeMismatchError
from src.numerics.kernels import Param, embedding_backward, embedding_lookup
from src.numerics.layers import Embedding, Layer
from src.rules.rulebook import NUM_FEATURES
from src.rules.tagger import RegexFeatureVector

PAD_ID = NUM_FEATURES
TABLE_ROWS = NUM_FEATURES + 1

RegexMode = Literal["ordinary", "bag"]


class RegexEmbeddingTable(Layer):
    """28 feature rows (27 topics plus no-topic) and one PAD row."""

    def __init__(self, d_model: int, rng: np.random.Generator) -> None:
        self.embedding = Embedding("regex", TABLE_ROWS, d_model, rng)

    @property
    def table(self) -> Param:
        return self.embedding.table

    @property
    def d_model(self) -> int:
        return self.embedding.dim

    @property
    def pad_id(self) -> int:
        return PAD_ID

    def parameters(self) -> list[Param]:
        return [self.table]


@dataclass
class RegexRows:
    """Embedded regex features ready for fusion, plus what backward needs."""

    rows: np.ndarray
    mask: np.ndarray
    mode: RegexMode
    cache: tuple

    def __len__(self) -> int:
        return self.rows.shape[0]


def embed_regex_features(
    fv: RegexFeatureVector,
    table: RegexEmbeddingTable,
    mode: RegexMode,
    cap: int,
) -> RegexRows:
    """Look up the embeddings for ``fv``.

    ``ordinary`` returns ``cap`` rows: one per feature id, then PAD rows,
    with ``mask`` False on the pads. ``bag`` returns the mean of the feature
    embeddings as a single row.
    """
    ids = list(fv.feature_ids)
    if len(ids) > cap:
        raise ShapeMismatchError(f"{len(ids)} features exceed the fusion cap of {cap}")

    if mode == "ordinary":
        padded = ids + [PAD_ID] * (cap - len(ids))
        rows, cache = embedding_lookup(padded, table.table)
        mask = np.array([i != PAD_ID for i in padded], dtype=bool)
        return RegexRows(rows=rows, mask=mask, mode=mode, cache=cache)

    if mode == "bag":
        rows, cache = embedding_lookup(ids, table.table)
        return RegexRows(
            rows=rows.mean(axis=0, keepdims=True),
            mask=np.ones(1, dtype=bool),
            mode=mode,
            cache=cache,
        )

    raise ValueError(f"Unknown regex mode: {mode!r}")


def embed_regex_backward(d_rows: np.ndarray, embedded: RegexRows) -> None:
    """Accumulate the gradient of the embedded rows into the table."""
    if embedded.mode == "bag":
        index, _ = embedded.cache
        d_rows = np.repeat(d_rows / len(index), len(index), axis=0)
    embedding_backward(d_rows, embedded.cache)
