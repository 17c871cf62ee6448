"""Side-by-side comparison of evaluated variants."""

from __future__ import annotations

import io
import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.table import Table

from src.errors import (
    ExportError,
    InconsistentTestSetsError,
    ZeroBaselineError,
    ZeroTotalSupportError,
)
from src.evaluation.metrics import EvalReport, relative_improvement
from src.fusion.variants import variant_spec

logger = logging.getLogger(__name__)

METRICS = ("precision", "recall", "f1")


@dataclass(frozen=True)
class Improvement:
    """Relative change of ``variant`` over ``baseline``; None where undefined."""

    baseline: int
    variant: int
    precision: float | None
    recall: float | None
    f1: float | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline": self.baseline,
            "variant": self.variant,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _safe_improvement(x: float, y: float) -> float | None:
    try:
        return relative_improvement(x, y)
    except ZeroBaselineError:
        return None


@dataclass(frozen=True)
class ComparisonReport:
    reports: tuple[EvalReport, ...]
    improvements: tuple[Improvement, ...]

    def rows(self) -> list[dict[str, Any]]:
        rows = []
        for r in self.reports:
            spec = variant_spec(r.variant)
            rows.append(
                {
                    "variant": r.variant,
                    "text_channel": spec.text_channel,
                    "regex_channel": spec.regex_channel,
                    "fusion_layer": spec.fusion_label,
                    "precision": r.weighted.precision,
                    "recall": r.weighted.recall,
                    "f1": r.weighted.f1,
                    "micro_f1": r.micro.f1,
                    "emerging_rate": r.emerging_rate,
                }
            )
        return rows

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.reports[0].n if self.reports else 0,
            "table": self.rows(),
            "improvements": [imp.to_dict() for imp in self.improvements],
            "reports": [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        """Aligned plain-text rendering of the comparison tables."""
        table = Table(title="Weighted evaluation results")
        for column in ("Model", "Text", "Regex", "Fusion"):
            table.add_column(column)
        for column in ("Precision", "Recall", "F1", "Emerging"):
            table.add_column(column, justify="right")
        for row in self.rows():
            table.add_row(
                str(row["variant"]),
                row["text_channel"],
                row["regex_channel"],
                row["fusion_layer"],
                f"{row['precision']:.4f}",
                f"{row['recall']:.4f}",
                f"{row['f1']:.4f}",
                f"{row['emerging_rate']:.2%}",
            )

        buffer = io.StringIO()
        console = Console(file=buffer, width=120, color_system=None, force_terminal=False)
        console.print(table)
        if self.improvements:
            gains = Table(title="Relative improvement (variant over baseline)")
            for column in ("Variant", "Baseline", "Precision", "Recall", "F1"):
                gains.add_column(column, justify="right")
            for imp in self.improvements:
                gains.add_row(
                    str(imp.variant),
                    str(imp.baseline),
                    *(_percent(getattr(imp, m)) for m in METRICS),
                )
            console.print(gains)
        return buffer.getvalue()

    def save(self, directory: str | Path) -> tuple[Path, Path]:
        out = Path(directory)
        try:
            out.mkdir(parents=True, exist_ok=True)
            json_path = out / "report.json"
            text_path = out / "report.txt"
            json_path.write_text(self.to_json() + "\n", encoding="utf-8")
            text_path.write_text(self.to_text(), encoding="utf-8")
        except OSError as exc:
            raise ExportError(f"Cannot write report to {out}: {exc}") from exc
        logger.info("Wrote comparison report to %s", json_path)
        return json_path, text_path


def _percent(value: float | None) -> str:
    return "n/a" if value is None else f"{value:+.2%}"


def comparison_report(results: Mapping[int, EvalReport]) -> ComparisonReport:
    """Tabulate variants evaluated on one test set, with pairwise improvements.

    Every pair (a, b) with a < b yields the improvement of b over a. The
    test set must carry at least one gold topic.
    """
    if not results:
        raise ValueError("comparison_report needs at least one evaluated variant")
    variants = sorted(results)
    reference = set(results[variants[0]].doc_ids)
    mismatched = [v for v in variants if set(results[v].doc_ids) != reference]
    if mismatched:
        raise InconsistentTestSetsError([variants[0], *mismatched])
    if any(results[v].weighted is None for v in variants):
        raise ZeroTotalSupportError()

    reports = tuple(results[v] for v in variants)
    improvements = []
    for i, base in enumerate(reports):
        for other in reports[i + 1 :]:
            improvements.append(
                Improvement(
                    baseline=base.variant,
                    variant=other.variant,
                    precision=_safe_improvement(base.weighted.precision, other.weighted.precision),
                    recall=_safe_improvement(base.weighted.recall, other.weighted.recall),
                    f1=_safe_improvement(base.weighted.f1, other.weighted.f1),
                )
            )
    return ComparisonReport(reports=reports, improvements=tuple(improvements))
