"""Prediction with emerging-topic thresholding, evaluation and threshold sweeps."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.errors import EmptyDatasetError, InvalidParameterError
from src.evaluation.metrics import EvalReport, emerging_rate, evaluate_predictions
from src.fusion.model import FusionModel, RuleOnlyModel
from src.pipeline.prediction import PredictionSet
from src.rules.rulebook import TopicRuleSet
from src.training.data import LabeledSample

logger = logging.getLogger(__name__)

Model = FusionModel | RuleOnlyModel


def _check_threshold(threshold: float) -> None:
    if not 0.0 <= threshold <= 1.0:
        raise InvalidParameterError("threshold", threshold, "a value in [0, 1]")


def predict(
    model: Model,
    rules: TopicRuleSet,
    text: str,
    threshold: float = 0.5,
    doc_id: str = "",
) -> PredictionSet:
    """Topics with probability >= ``threshold``, or the emerging topic if none."""
    _check_threshold(threshold)
    if isinstance(model, RuleOnlyModel):
        return model.predict(text, doc_id, threshold)
    probabilities = model.predict_proba(text, doc_id)
    return PredictionSet.from_probabilities(doc_id, probabilities, rules.names, threshold)


def predict_batch(
    model: Model,
    samples: Sequence[LabeledSample],
    threshold: float = 0.5,
) -> list[PredictionSet]:
    return [predict(model, model.rules, s.text, threshold, s.doc_id) for s in samples]


def evaluate_model(
    model: Model,
    samples: Sequence[LabeledSample],
    threshold: float = 0.5,
) -> EvalReport:
    """Predict ``samples`` and score them against their gold labels."""
    if not samples:
        raise EmptyDatasetError()
    preds = predict_batch(model, samples, threshold)
    report = evaluate_predictions(
        preds,
        [s.labels for s in samples],
        model.rules.names,
        variant=model.variant,
        threshold=None if isinstance(model, RuleOnlyModel) else threshold,
    )
    if report.weighted is None:
        logger.info(
            "Variant %d on %d samples without gold topics: emerging %.1f%%",
            model.variant,
            report.n,
            100.0 * report.emerging_rate,
        )
    else:
        logger.info(
            "Variant %d on %d samples: weighted P=%.4f R=%.4f F1=%.4f, emerging %.1f%%",
            model.variant,
            report.n,
            report.weighted.precision,
            report.weighted.recall,
            report.weighted.f1,
            100.0 * report.emerging_rate,
        )
    return report


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    weighted_f1: float | None
    micro_f1: float | None
    emerging_rate: float


def sweep_threshold(
    model: Model,
    samples: Sequence[LabeledSample],
    thresholds: Sequence[float],
) -> list[SweepPoint]:
    """Weighted F1 and emerging rate at each threshold.

    Probabilities are computed once per sample and re-thresholded. F1 is
    None when ``samples`` carry no gold topic.
    """
    if not samples:
        raise EmptyDatasetError()
    names = model.rules.names
    gold = [s.labels for s in samples]
    scores: list[np.ndarray] | None = None
    if isinstance(model, FusionModel):
        scores = [model.predict_proba(s.text, s.doc_id) for s in samples]

    points = []
    for tau in thresholds:
        _check_threshold(tau)
        if scores is None:
            preds = predict_batch(model, samples, tau)
        else:
            preds = [
                PredictionSet.from_probabilities(s.doc_id, p, names, tau)
                for s, p in zip(samples, scores)
            ]
        report = evaluate_predictions(preds, gold, names, model.variant, tau)
        points.append(
            SweepPoint(
                threshold=float(tau),
                weighted_f1=None if report.weighted is None else report.weighted.f1,
                micro_f1=None if report.micro is None else report.micro.f1,
                emerging_rate=emerging_rate(preds),
            )
        )
    return points
