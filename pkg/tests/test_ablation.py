"""Tests for the five-variant ablation run."""

from __future__ import annotations

import json

import pytest

from src.config import EncoderConfig, FusionConfig, LoggingConfig, Settings, TrainConfig
from src.errors import InconsistentTestSetsError
from src.evaluation.report import comparison_report
from src.pipeline.ablation import regex_breakdown, run_ablation
from src.pipeline.corpus import generate_corpus


@pytest.fixture
def ablation_settings():
    return Settings(
        encoder=EncoderConfig(d_model=8, heads=2, layers=1, max_seq_len=64),
        fusion=FusionConfig(heads=2),
        training=TrainConfig(lr=1e-3, batch_size=4, max_epochs=2, patience=None, seed=3),
        logging=LoggingConfig(level="WARNING"),
    )


@pytest.fixture
def corpus(rules):
    return generate_corpus(rules, size=40, seed=9)


class TestRegexBreakdown:
    def test_counts(self, rules, tiny_samples):
        breakdown = regex_breakdown(tiny_samples, rules, cap=7)
        assert (breakdown.classifiable, breakdown.unclassifiable) == (5, 1)
        assert breakdown.total == 6


class TestRunAblation:
    def test_five_rows_on_one_test_set(self, rules, ablation_settings, corpus):
        result = run_ablation(corpus, rules, ablation_settings)
        assert [row["variant"] for row in result.report.rows()] == [1, 2, 3, 4, 5]
        assert (result.train_size, result.test_size) == (28, 12)
        assert result.breakdown.total == 12
        assert sorted(result.histories) == [2, 3, 4, 5]
        assert len(result.report.improvements) == 10

    def test_subset_of_variants(self, rules, ablation_settings, corpus):
        result = run_ablation(corpus, rules, ablation_settings, variants=(1, 5))
        assert sorted(result.evaluations) == [1, 5]

    def test_artifacts_written(self, rules, ablation_settings, corpus, tmp_path):
        run_ablation(corpus, rules, ablation_settings, output_dir=tmp_path)
        for variant in range(1, 6):
            assert (tmp_path / f"variant-{variant}" / "model.json").is_file()
        assert not (tmp_path / "variant-1" / "model.ckpt").exists()
        assert (tmp_path / "variant-5" / "history.json").is_file()
        summary = json.loads((tmp_path / "ablation.json").read_text())
        assert summary["test_size"] == 12
        assert summary["regex_classifiable"] + summary["not_regex_classifiable"] == 12
        assert (tmp_path / "report.txt").read_text()

    def test_same_seed_byte_identical(self, rules, ablation_settings, corpus, tmp_path):
        for run in ("a", "b"):
            run_ablation(corpus, rules, ablation_settings, output_dir=tmp_path / run)
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*"))
        assert files
        for rel in files:
            if (tmp_path / "a" / rel).is_file():
                assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_mixed_test_sets_rejected(self, rules, ablation_settings, corpus):
        first = run_ablation(corpus, rules, ablation_settings, variants=(1,))
        other = ablation_settings.model_copy(
            update={"training": ablation_settings.training.model_copy(update={"seed": 4})}
        )
        second = run_ablation(corpus, rules, other, variants=(2,))
        with pytest.raises(InconsistentTestSetsError):
            comparison_report({1: first.evaluations[1], 2: second.evaluations[2]})
