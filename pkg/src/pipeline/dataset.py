"""JSON-lines dataset ingestion and writing."""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from src.errors import (
    DuplicateDocIdError,
    ExportError,
    MalformedLineError,
    MissingFileError,
    UnknownLabelError,
)
from src.rules.rulebook import TopicRuleSet
from src.training.data import LabeledSample

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_WHITESPACE = re.compile(r"\s+")


def normalize_whitespace(text: str) -> str:
    return _WHITESPACE.sub(" ", text).strip()


@dataclass(frozen=True)
class Dataset:
    samples: tuple[LabeledSample, ...]
    source: str
    schema_version: int = SCHEMA_VERSION

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.samples]


def _parse_record(line_no: int, line: str) -> tuple[str, str, list[str]]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLineError(line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(record, dict):
        raise MalformedLineError(line_no, "expected a JSON object")

    doc_id, text, labels = record.get("id"), record.get("text"), record.get("labels", [])
    if not isinstance(doc_id, str) or not doc_id:
        raise MalformedLineError(line_no, "'id' must be a non-empty string")
    if not isinstance(text, str):
        raise MalformedLineError(line_no, "'text' must be a string")
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise MalformedLineError(line_no, "'labels' must be a list of strings")
    return doc_id, text, labels


def ingest(path: str | Path, rules: TopicRuleSet) -> Dataset:
    """Load ``{"id", "text", "labels"}`` JSON lines, validated against ``rules``."""
    source = Path(path)
    if not source.is_file():
        raise MissingFileError(source)

    known = set(rules.names)
    samples: list[LabeledSample] = []
    seen: set[str] = set()
    with open(source, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            doc_id, raw_text, labels = _parse_record(line_no, line)
            if doc_id in seen:
                raise DuplicateDocIdError(doc_id)
            for label in labels:
                if label not in known:
                    raise UnknownLabelError(label)
            text = normalize_whitespace(raw_text)
            if not text:
                raise MalformedLineError(line_no, "'text' is empty")
            seen.add(doc_id)
            samples.append(LabeledSample(doc_id=doc_id, text=text, labels=frozenset(labels)))

    logger.info("Ingested %d samples from %s", len(samples), source)
    return Dataset(samples=tuple(samples), source=str(source))


def write_dataset(samples: Iterable[LabeledSample], path: str | Path, rules: TopicRuleSet) -> Path:
    """Write samples as JSON lines, labels in topic-id order."""
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            for s in samples:
                labels = sorted(s.labels, key=lambda name: rules.id_of(name))
                record = {"id": s.doc_id, "text": s.text, "labels": labels}
                f.write(json.dumps(record) + "\n")
    except OSError as exc:
        raise ExportError(f"Cannot write dataset {out}: {exc}") from exc
    return out
