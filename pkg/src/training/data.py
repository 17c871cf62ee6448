"""Labeled samples, splitting and target matrices."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from src.errors import EmptyDatasetError, InvalidParameterError, UnknownLabelError
from src.rules.rulebook import NUM_TOPICS, TopicRuleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledSample:
    """One survey response and its gold topic names."""

    doc_id: str
    text: str
    labels: frozenset[str]

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"sample {self.doc_id!r} has empty text")
        if not isinstance(self.labels, frozenset):
            object.__setattr__(self, "labels", frozenset(self.labels))


def split_dataset(
    ds: Sequence[LabeledSample],
    train_ratio: float = 0.7,
    seed: int = 42,
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded shuffle, then the first ``round(n * train_ratio)`` samples train."""
    if not ds:
        raise EmptyDatasetError()
    if not 0.0 < train_ratio < 1.0:
        raise InvalidParameterError("train_ratio", train_ratio, "a value in (0, 1)")

    order = np.random.default_rng(seed).permutation(len(ds))
    n_train = int(round(len(ds) * train_ratio))
    train = [ds[i] for i in order[:n_train]]
    test = [ds[i] for i in order[n_train:]]
    logger.info("Split %d samples into %d train / %d test", len(ds), len(train), len(test))
    return train, test


def make_target_matrix(samples: Sequence[LabeledSample], rules: TopicRuleSet) -> np.ndarray:
    """n x 27 matrix of 0/1 with a 1 at every gold topic column."""
    targets = np.zeros((len(samples), NUM_TOPICS))
    for row, sample in enumerate(samples):
        for name in sample.labels:
            column = rules.id_of(name)
            if column is None:
                raise UnknownLabelError(name)
            targets[row, column] = 1.0
    return targets


@dataclass(frozen=True)
class LabelCount:
    topic_id: int
    name: str
    count: int
    percent: float


def label_distribution(samples: Iterable[LabeledSample], rules: TopicRuleSet) -> list[LabelCount]:
    """Per-topic label counts and their share of all label occurrences."""
    counts: Counter[str] = Counter()
    for sample in samples:
        counts.update(sample.labels)
    total = sum(counts.values())
    return [
        LabelCount(
            topic_id=rule.id,
            name=rule.name,
            count=counts[rule.name],
            percent=100.0 * counts[rule.name] / total if total else 0.0,
        )
        for rule in rules.rules
    ]
