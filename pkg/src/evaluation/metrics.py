"""Per-class, support-weighted and micro-averaged classification metrics."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from src.errors import LengthMismatchError, ZeroBaselineError, ZeroTotalSupportError
from src.pipeline.prediction import PredictionSet


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _harmonic(precision: float, recall: float) -> float:
    total = precision + recall
    return 2.0 * precision * recall / total if total else 0.0


@dataclass(frozen=True)
class ClassMetrics:
    """Confusion counts for one topic; ``support`` is the gold-positive count."""

    class_id: int
    tp: int
    fp: int
    fn: int
    name: str = ""

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        if self.tp == 0:
            return 0.0
        return _harmonic(self.precision, self.recall)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.class_id,
            "name": self.name,
            "support": self.support,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def per_class_counts(
    preds: Sequence[PredictionSet],
    gold: Sequence[frozenset[str]],
    class_id: int,
    names: Sequence[str],
) -> ClassMetrics:
    """Count tp/fp/fn for one class; emerging predictions are all negative."""
    if len(preds) != len(gold):
        raise LengthMismatchError(len(preds), len(gold))
    name = names[class_id]
    tp = fp = fn = 0
    for pred, labels in zip(preds, gold):
        predicted = name in pred.labels
        actual = name in labels
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
    return ClassMetrics(class_id=class_id, tp=tp, fp=fp, fn=fn, name=name)


def per_class_metrics(
    preds: Sequence[PredictionSet],
    gold: Sequence[frozenset[str]],
    names: Sequence[str],
) -> list[ClassMetrics]:
    return [per_class_counts(preds, gold, k, names) for k in range(len(names))]


@dataclass(frozen=True)
class Aggregate:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def weighted_metrics(per_class: Sequence[ClassMetrics]) -> Aggregate:
    """Support-weighted mean of per-class precision, recall and F1."""
    total = sum(c.support for c in per_class)
    if total == 0:
        raise ZeroTotalSupportError()
    precision = recall = f1 = 0.0
    for c in per_class:
        if not c.support:
            continue
        w = c.support / total
        precision += w * c.precision
        recall += w * c.recall
        f1 += w * c.f1
    return Aggregate(precision, recall, f1)


def micro_metrics(per_class: Sequence[ClassMetrics]) -> Aggregate:
    """Precision, recall and F1 from confusion counts pooled over classes."""
    tp = sum(c.tp for c in per_class)
    fp = sum(c.fp for c in per_class)
    fn = sum(c.fn for c in per_class)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return Aggregate(precision, recall, _harmonic(precision, recall) if tp else 0.0)


def relative_improvement(score_x: float, score_y: float) -> float:
    """``(score_y - score_x) / score_x``."""
    if score_x == 0:
        raise ZeroBaselineError()
    return (score_y - score_x) / score_x


def emerging_rate(preds: Sequence[PredictionSet]) -> float:
    return _ratio(sum(p.is_emerging for p in preds), len(preds))


@dataclass(frozen=True)
class EvalReport:
    """Metrics of one variant on one test set.

    ``weighted`` and ``micro`` are None when no document carries a gold topic.
    """

    variant: int
    threshold: float | None
    per_class: tuple[ClassMetrics, ...]
    weighted: Aggregate | None
    micro: Aggregate | None
    emerging_rate: float
    doc_ids: tuple[str, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.doc_ids)

    def to_dict(self) -> dict[str, Any]:
        return {
            "variant": self.variant,
            "threshold": self.threshold,
            "n": self.n,
            "weighted": None if self.weighted is None else self.weighted.to_dict(),
            "micro": None if self.micro is None else self.micro.to_dict(),
            "per_class": [c.to_dict() for c in self.per_class],
            "emerging_rate": self.emerging_rate,
        }


def evaluate_predictions(
    preds: Sequence[PredictionSet],
    gold: Sequence[frozenset[str]],
    names: Sequence[str],
    variant: int,
    threshold: float | None,
) -> EvalReport:
    """Score aligned predictions against gold label sets.

    A gold set without any topic still yields per-class counts and the
    emerging rate; the aggregates are left as None.
    """
    per_class = per_class_metrics(preds, gold, names)
    try:
        weighted: Aggregate | None = weighted_metrics(per_class)
        micro: Aggregate | None = micro_metrics(per_class)
    except ZeroTotalSupportError:
        weighted = micro = None
    return EvalReport(
        variant=variant,
        threshold=threshold,
        per_class=tuple(per_class),
        weighted=weighted,
        micro=micro,
        emerging_rate=emerging_rate(preds),
        doc_ids=tuple(p.doc_id for p in preds),
    )
