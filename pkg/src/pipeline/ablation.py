"""Train and evaluate all five variants on one shared split."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from src.config import Settings
from src.encoder.precomputed import load_precomputed_vectors
from src.encoder.vocab import build_vocab
from src.errors import ExportError
from src.evaluation.metrics import EvalReport
from src.evaluation.report import ComparisonReport, comparison_report
from src.fusion.persistence import save_model
from src.fusion.variants import VARIANTS, assemble_model
from src.pipeline.inference import evaluate_model
from src.rules.rulebook import TopicRuleSet
from src.rules.tagger import tag
from src.training.data import LabeledSample, label_distribution, split_dataset
from src.training.trainer import TrainHistory, train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegexBreakdown:
    """Test documents some rule fires on versus those tagged no-topic."""

    classifiable: int
    unclassifiable: int

    @property
    def total(self) -> int:
        return self.classifiable + self.unclassifiable

    def to_dict(self) -> dict[str, int]:
        return {
            "regex_classifiable": self.classifiable,
            "not_regex_classifiable": self.unclassifiable,
        }


def regex_breakdown(
    samples: Iterable[LabeledSample], rules: TopicRuleSet, cap: int
) -> RegexBreakdown:
    unmatched = matched = 0
    for s in samples:
        if tag(s.text, rules, cap, s.doc_id).is_no_topic:
            unmatched += 1
        else:
            matched += 1
    return RegexBreakdown(classifiable=matched, unclassifiable=unmatched)


@dataclass
class AblationResult:
    report: ComparisonReport
    breakdown: RegexBreakdown
    train_size: int
    test_size: int
    evaluations: dict[int, EvalReport] = field(default_factory=dict)
    histories: dict[int, TrainHistory] = field(default_factory=dict)

    def summary(self) -> dict[str, Any]:
        return {
            "train_size": self.train_size,
            "test_size": self.test_size,
            **self.breakdown.to_dict(),
            "best_epochs": {str(v): h.best_epoch for v, h in sorted(self.histories.items())},
        }


def run_ablation(
    samples: Sequence[LabeledSample],
    rules: TopicRuleSet,
    settings: Settings,
    output_dir: str | Path | None = None,
    variants: Sequence[int] = tuple(VARIANTS),
) -> AblationResult:
    """Split once, train every trainable variant, evaluate all on the test part.

    With ``output_dir`` each variant's model and history are written under
    ``variant-<n>/`` next to ``report.json``, ``report.txt`` and
    ``ablation.json``; no file carries a timestamp.
    """
    cfg = settings.training
    train_set, test_set = split_dataset(list(samples), cfg.train_ratio, cfg.seed)
    breakdown = regex_breakdown(test_set, rules, settings.fusion.cap)
    logger.info(
        "Test set: %d regex-classifiable, %d not regex-classifiable",
        breakdown.classifiable,
        breakdown.unclassifiable,
    )
    for part, subset in (("train", train_set), ("test", test_set)):
        busiest = max(label_distribution(subset, rules), key=lambda c: c.count)
        logger.info(
            "%s labels: most frequent %r (%d, %.1f%%)",
            part,
            busiest.name,
            busiest.count,
            busiest.percent,
        )

    texts = [s.text for s in train_set]
    vocab = encoder = None
    if settings.encoder.kind == "mini":
        vocab = build_vocab(texts, min_freq=settings.encoder.min_freq)
    else:
        encoder = load_precomputed_vectors(settings.encoder.vectors_path, settings.encoder.d_model)

    out = Path(output_dir) if output_dir is not None else None
    evaluations: dict[int, EvalReport] = {}
    histories: dict[int, TrainHistory] = {}
    for variant in variants:
        model = assemble_model(variant, settings, rules, texts, encoder=encoder, vocab=vocab)
        if model.trainable:
            model, histories[variant] = train(model, train_set, cfg)
        evaluations[variant] = evaluate_model(model, test_set, cfg.threshold)
        if out is not None:
            variant_dir = out / f"variant-{variant}"
            save_model(model, variant_dir)
            if variant in histories:
                histories[variant].save(variant_dir / "history.json")

    result = AblationResult(
        report=comparison_report(evaluations),
        breakdown=breakdown,
        train_size=len(train_set),
        test_size=len(test_set),
        evaluations=evaluations,
        histories=histories,
    )
    if out is not None:
        result.report.save(out)
        try:
            (out / "ablation.json").write_text(json.dumps(result.summary(), indent=2) + "\n")
        except OSError as exc:
            raise ExportError(f"Cannot write ablation summary to {out}: {exc}") from exc
    return result
