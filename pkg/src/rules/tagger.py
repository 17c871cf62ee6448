"""Regex topic tagging and the rules-only classifier."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from src.pipeline.prediction import PredictionSet
from src.rules.rulebook import NO_TOPIC_ID, TopicRuleSet

logger = logging.getLogger(__name__)

DEFAULT_CAP = 7


@dataclass(frozen=True)
class RegexFeatureVector:
    """Discrete topic features fired for one document.

    ``feature_ids`` is sorted and unique. ``[NO_TOPIC_ID]`` stands for
    "no rule matched"; the sentinel never appears next to a real topic.
    """

    doc_id: str
    feature_ids: tuple[int, ...]
    truncated: bool = False

    @property
    def is_no_topic(self) -> bool:
        return self.feature_ids == (NO_TOPIC_ID,)

    def __len__(self) -> int:
        return len(self.feature_ids)


def matched_ids(text: str, rules: TopicRuleSet) -> list[int]:
    """Ids of every rule whose pattern occurs in ``text``, ascending."""
    return [rule.id for rule in rules.rules if rule.matches(text)]


def tag(
    text: str,
    rules: TopicRuleSet,
    cap: int = DEFAULT_CAP,
    doc_id: str = "",
) -> RegexFeatureVector:
    """Tag ``text`` with the ids of matching rules, keeping the lowest ``cap``."""
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")

    ids = matched_ids(text, rules)
    if not ids:
        return RegexFeatureVector(doc_id=doc_id, feature_ids=(rules.no_topic_id,))

    truncated = len(ids) > cap
    if truncated:
        logger.debug("Document %r matched %d rules; keeping the first %d", doc_id, len(ids), cap)
    return RegexFeatureVector(doc_id=doc_id, feature_ids=tuple(ids[:cap]), truncated=truncated)


def classify_rules_only(text: str, rules: TopicRuleSet, doc_id: str = "") -> PredictionSet:
    """Rules-only baseline: every matched topic with probability 1.0.

    No cap applies here; an unmatched text yields the emerging topic.
    """
    ids = matched_ids(text, rules)
    topics = tuple((rules.name_of(i), 1.0) for i in ids)
    return PredictionSet(doc_id=doc_id, topics=topics, is_emerging=not topics)
