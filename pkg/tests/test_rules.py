"""Tests for the rulebook loader and regex tagging."""

from __future__ import annotations

import pytest

from src.errors import (
    BadPatternError,
    DuplicateTopicIdError,
    MissingFileError,
    RulebookParseError,
    WrongRuleCountError,
)
from src.pipeline.corpus import OFF_TOPIC, multi_topic_text
from src.pipeline.prediction import EMERGING_TOPIC
from src.rules.rulebook import (
    NO_TOPIC_ID,
    NUM_FEATURES,
    NUM_TOPICS,
    build_rulebook,
    compile_rule,
    load_rulebook,
)
from src.rules.tagger import classify_rules_only, matched_ids, tag


def _records():
    return [(i, f"Topic {i}", f"keyword{i:02d}") for i in range(NUM_TOPICS)]


def _write(tmp_path, lines):
    path = tmp_path / "rules.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestRulebook:
    def test_reference_rulebook(self, rules):
        assert len(rules) == NUM_TOPICS
        assert rules.num_features == NUM_FEATURES == 28
        assert rules.no_topic_id == NO_TOPIC_ID == 27
        assert [r.id for r in rules.rules] == list(range(NUM_TOPICS))
        assert rules.name_of(8) == "Call Transfer"
        assert rules.id_of("Portal Password") == 25
        assert rules.id_of("Not a topic") is None

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        lines = ["# header", ""] + [f"{i}\t{n}\t{p}" for i, n, p in _records()]
        rules = load_rulebook(_write(tmp_path, lines))
        assert rules.name_of(0) == "Topic 0"

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_rulebook(tmp_path / "absent.tsv")

    def test_wrong_field_count(self, tmp_path):
        with pytest.raises(RulebookParseError) as info:
            load_rulebook(_write(tmp_path, ["0\tonly two fields"]))
        assert info.value.line == 1

    def test_non_integer_id(self, tmp_path):
        with pytest.raises(RulebookParseError):
            load_rulebook(_write(tmp_path, ["zero\tName\tpattern"]))

    def test_id_out_of_range(self, tmp_path):
        with pytest.raises(RulebookParseError):
            load_rulebook(_write(tmp_path, ["27\tName\tpattern"]))

    def test_duplicate_id(self):
        records = _records()
        records[5] = (4, "Again", "again")
        with pytest.raises(DuplicateTopicIdError):
            build_rulebook(records)

    def test_too_few_rules(self):
        with pytest.raises(WrongRuleCountError) as info:
            build_rulebook(_records()[:26])
        assert info.value.found == 26

    def test_invalid_regex(self):
        with pytest.raises(BadPatternError):
            compile_rule(0, "Broken", "(unclosed")

    @pytest.mark.parametrize("pattern", [r"(a)\1", r"foo(?=bar)", r"(?<!x)y", r"(?!z)"])
    def test_non_portable_constructs_rejected(self, pattern):
        with pytest.raises(BadPatternError):
            compile_rule(0, "Topic", pattern)

    @pytest.mark.parametrize(
        "pattern", [r"(?P<x>a)(?P=x)", r"(?<=x)y", r"(a)\\\1", r"(a)?(?(1)b|c)"]
    )
    def test_named_and_escaped_forms_rejected(self, pattern):
        with pytest.raises(BadPatternError):
            compile_rule(0, "Topic", pattern)

    @pytest.mark.parametrize(
        "pattern,text",
        [
            (r"(?P<delay>late|slow)", "The refund was late"),
            (r"c:\\1", r"saved under c:\1 again"),
            (r"\(?=", "a (= b"),
            (r"(?:rude|curt)", "The agent was curt"),
        ],
    )
    def test_portable_look_alikes_accepted(self, pattern, text):
        assert compile_rule(0, "Topic", pattern).matches(text)

    def test_matching_is_case_insensitive(self):
        rule = compile_rule(0, "Transfer", "transfer")
        assert rule.matches("They TRANSFERRED me")


class TestTagger:
    def test_single_topic(self, rules):
        fv = tag("Nobody called me back or followed up.", rules, doc_id="d1")
        assert fv.feature_ids == (11,)
        assert fv.doc_id == "d1"
        assert not fv.truncated

    def test_two_topics_sorted(self, rules):
        fv = tag("The agent was rude and the service was terrible.", rules)
        assert fv.feature_ids == (3, 4)

    def test_no_match_yields_no_topic(self, rules):
        fv = tag("Thank you for the newsletter.", rules)
        assert fv.feature_ids == (NO_TOPIC_ID,)
        assert fv.is_no_topic

    def test_truncates_to_lowest_ids(self, rules):
        text = multi_topic_text(range(9))
        assert matched_ids(text, rules) == list(range(9))
        fv = tag(text, rules, cap=7)
        assert fv.feature_ids == tuple(range(7))
        assert fv.truncated

    def test_exactly_cap_not_truncated(self, rules):
        fv = tag(multi_topic_text(range(7)), rules, cap=7)
        assert len(fv) == 7
        assert not fv.truncated

    def test_sentinel_never_mixed_with_topics(self, rules):
        for text in (multi_topic_text([2, 19]), *OFF_TOPIC):
            ids = tag(text, rules).feature_ids
            assert ids == (NO_TOPIC_ID,) or NO_TOPIC_ID not in ids

    def test_invalid_cap(self, rules):
        with pytest.raises(ValueError):
            tag("anything", rules, cap=0)


class TestRulesOnlyClassifier:
    def test_matched_topics_have_probability_one(self, rules):
        pred = classify_rules_only("My claim was denied.", rules, doc_id="x")
        assert pred.topics == (("Claims Result", 1.0),)
        assert not pred.is_emerging
        assert pred.threshold is None

    def test_no_cap_for_rules_only(self, rules):
        pred = classify_rules_only(multi_topic_text(range(9)), rules)
        assert len(pred.topics) == 9

    def test_unmatched_is_emerging(self, rules):
        pred = classify_rules_only("I love the new logo colour scheme.", rules)
        assert pred.is_emerging
        assert pred.names == [EMERGING_TOPIC]
        assert pred.labels == frozenset()
