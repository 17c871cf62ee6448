"""Prediction records shared by the rules-only and learned classifiers."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

EMERGING_TOPIC = "Emerging Topic"


@dataclass(frozen=True)
class PredictionSet:
    """Topics predicted for one document.

    ``topics`` holds (name, probability) pairs in topic-id order. An empty
    ``topics`` tuple means the document is an emerging topic.
    """

    doc_id: str
    topics: tuple[tuple[str, float], ...]
    is_emerging: bool
    threshold: float | None = None

    def __post_init__(self) -> None:
        if self.is_emerging != (len(self.topics) == 0):
            raise ValueError("is_emerging must hold exactly when no topic is retained")
        names = [name for name, _ in self.topics]
        if len(set(names)) != len(names):
            raise ValueError("topic names must be unique")

    @property
    def labels(self) -> frozenset[str]:
        """Positive topic names (empty for an emerging prediction)."""
        return frozenset(name for name, _ in self.topics)

    @property
    def names(self) -> list[str]:
        """Display names, ``[Emerging Topic]`` when nothing was retained."""
        if self.is_emerging:
            return [EMERGING_TOPIC]
        return [name for name, _ in self.topics]

    @classmethod
    def from_probabilities(
        cls,
        doc_id: str,
        probabilities: np.ndarray,
        names: Sequence[str],
        threshold: float,
    ) -> PredictionSet:
        """Keep every topic whose probability reaches ``threshold``."""
        topics = tuple(
            (names[i], float(p)) for i, p in enumerate(probabilities) if p >= threshold
        )
        return cls(doc_id=doc_id, topics=topics, is_emerging=not topics, threshold=threshold)

    def to_dict(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "topics": [name for name, _ in self.topics],
            "probabilities": [p for _, p in self.topics],
            "is_emerging": self.is_emerging,
            "threshold": self.threshold,
        }
