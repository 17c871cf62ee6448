"""Topic rule set: loading and validating the regex rulebook."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from src.errors import (
    BadPatternError,
    DuplicateTopicIdError,
    MissingFileError,
    RulebookParseError,
    WrongRuleCountError,
)

logger = logging.getLogger(__name__)

NUM_TOPICS = 27
NO_TOPIC_ID = NUM_TOPICS
NUM_FEATURES = NUM_TOPICS + 1

# Unescaped backreferences, lookaround and conditional groups
_NON_PORTABLE = re.compile(r"(?<!\\)(?:\\\\)*(?:\\[1-9]|\(\?(?:<?[=!]|P=|\())")


@dataclass(frozen=True)
class TopicRule:
    """One topic and the pattern that signals it."""

    id: int
    name: str
    pattern: str
    compiled: re.Pattern[str] = field(repr=False, compare=False)

    def matches(self, text: str) -> bool:
        return self.compiled.search(text) is not None


@dataclass(frozen=True)
class TopicRuleSet:
    """Ordered, validated rules; ``rules[i].id == i``."""

    rules: tuple[TopicRule, ...]
    no_topic_id: int = NO_TOPIC_ID

    def __post_init__(self) -> None:
        if len(self.rules) != NUM_TOPICS:
            raise WrongRuleCountError(len(self.rules), NUM_TOPICS)
        if self.no_topic_id != len(self.rules):
            raise ValueError("no_topic_id must equal the rule count")

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def names(self) -> list[str]:
        return [rule.name for rule in self.rules]

    @property
    def num_features(self) -> int:
        return len(self.rules) + 1

    def name_of(self, topic_id: int) -> str:
        return self.rules[topic_id].name

    def id_of(self, name: str) -> int | None:
        return self._name_index.get(name)

    @cached_property
    def _name_index(self) -> dict[str, int]:
        return {rule.name: rule.id for rule in self.rules}


def compile_rule(topic_id: int, name: str, pattern: str) -> TopicRule:
    """Compile one rule, rejecting patterns outside the portable dialect."""
    if not name.strip():
        raise BadPatternError(topic_id, "empty topic name")
    if not pattern:
        raise BadPatternError(topic_id, "empty pattern")
    if _NON_PORTABLE.search(pattern):
        raise BadPatternError(topic_id, "backreferences and lookaround are not supported")
    try:
        compiled = re.compile(pattern, re.IGNORECASE)
    except re.error as exc:
        raise BadPatternError(topic_id, str(exc)) from exc
    return TopicRule(id=topic_id, name=name.strip(), pattern=pattern, compiled=compiled)


def build_rulebook(records: list[tuple[int, str, str]]) -> TopicRuleSet:
    """Validate (id, name, pattern) records into a TopicRuleSet."""
    seen: dict[int, TopicRule] = {}
    for topic_id, name, pattern in records:
        if topic_id in seen:
            raise DuplicateTopicIdError(topic_id)
        seen[topic_id] = compile_rule(topic_id, name, pattern)

    if len(seen) != NUM_TOPICS:
        raise WrongRuleCountError(len(seen), NUM_TOPICS)
    if sorted(seen) != list(range(NUM_TOPICS)):
        missing = sorted(set(range(NUM_TOPICS)) - set(seen))
        raise RulebookParseError(0, f"topic ids must be contiguous 0..26; missing {missing}")

    return TopicRuleSet(rules=tuple(seen[i] for i in range(NUM_TOPICS)))


def load_rulebook(path: str | Path) -> TopicRuleSet:
    """Load a tab-separated rulebook file.

    Each non-comment line is ``<id>\\t<name>\\t<pattern>``; lines starting
    with ``#`` and blank lines are skipped.
    """
    rulebook_path = Path(path)
    if not rulebook_path.is_file():
        raise MissingFileError(rulebook_path)

    records: list[tuple[int, str, str]] = []
    with open(rulebook_path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise RulebookParseError(
                    line_no, f"expected 3 tab-separated fields, got {len(parts)}"
                )
            raw_id, name, pattern = parts
            try:
                topic_id = int(raw_id)
            except ValueError as exc:
                raise RulebookParseError(line_no, f"topic id {raw_id!r} is not an integer") from exc
            if not 0 <= topic_id < NUM_TOPICS:
                raise RulebookParseError(line_no, f"topic id {topic_id} outside [0, {NUM_TOPICS})")
            records.append((topic_id, name, pattern))

    rules = build_rulebook(records)
    logger.info("Loaded %d topic rules from %s", len(rules), rulebook_path)
    return rules
