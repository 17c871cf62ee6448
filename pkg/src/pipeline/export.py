"""Newline-delimited JSON bulk export of predictions for a search index."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path

from src.errors import EmptyDatasetError, ExportError, MalformedLineError, MissingFileError
from src.pipeline.prediction import PredictionSet

UTC = timezone.utc  # datetime.UTC alias (Python 3.11+)

logger = logging.getLogger(__name__)


def export_bulk(
    predictions: Sequence[PredictionSet],
    path: str | Path,
    variant: int,
    timestamp: str | None = None,
) -> Path:
    """Write an action line and a document line per prediction."""
    if not predictions:
        raise EmptyDatasetError()
    stamp = timestamp or datetime.now(UTC).isoformat(timespec="seconds")
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            for pred in predictions:
                action = {"index": {"_id": pred.doc_id}}
                doc = {
                    "doc_id": pred.doc_id,
                    "topics": [name for name, _ in pred.topics],
                    "probabilities": [p for _, p in pred.topics],
                    "is_emerging": pred.is_emerging,
                    "model_variant": variant,
                    "timestamp": stamp,
                }
                if pred.threshold is not None:
                    doc["threshold"] = pred.threshold
                f.write(json.dumps(action) + "\n")
                f.write(json.dumps(doc) + "\n")
    except OSError as exc:
        raise ExportError(f"Cannot write bulk export {out}: {exc}") from exc
    logger.info("Exported %d predictions to %s", len(predictions), out)
    return out


def read_bulk(path: str | Path) -> list[PredictionSet]:
    """Parse a bulk export back into predictions."""
    src = Path(path)
    if not src.is_file():
        raise MissingFileError(src)

    with open(src, encoding="utf-8") as f:
        lines = [line for line in f if line.strip()]
    if len(lines) % 2:
        raise MalformedLineError(len(lines), "bulk file must alternate action and document lines")

    predictions = []
    for i in range(0, len(lines), 2):
        try:
            action = json.loads(lines[i])
            doc = json.loads(lines[i + 1])
            doc_id = action["index"]["_id"]
            topics = tuple(zip(doc["topics"], doc["probabilities"], strict=True))
            predictions.append(
                PredictionSet(
                    doc_id=doc_id,
                    topics=topics,
                    is_emerging=doc["is_emerging"],
                    threshold=doc.get("threshold"),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedLineError(i + 1, str(exc)) from exc
    return predictions
