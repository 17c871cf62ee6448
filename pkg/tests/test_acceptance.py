"""End-to-end ablation and emerging-topic checks at desk scale.

These train every variant several times; run them with ``pytest -m slow``.
"""

from __future__ import annotations

import pytest

from src.config import load_config, resolve_path
from src.fusion.variants import assemble_model
from src.pipeline.ablation import run_ablation
from src.pipeline.corpus import generate_corpus, generate_emerging
from src.pipeline.inference import predict_batch
from src.training.data import split_dataset
from src.training.trainer import train

SEEDS = (7, 11, 19, 23, 31)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def ablation_settings():
    return load_config(resolve_path("configs/ablation.yaml"))


@pytest.fixture(scope="module")
def f1_by_seed(rules, ablation_settings):
    scores = {}
    for seed in SEEDS:
        settings = ablation_settings.model_copy(
            update={"training": ablation_settings.training.model_copy(update={"seed": seed})}
        )
        c = settings.corpus
        corpus = generate_corpus(
            rules,
            c.size,
            c.regex_fraction,
            seed,
            c.max_labels,
            off_topic_fraction=c.off_topic_fraction,
        )
        result = run_ablation(corpus, rules, settings)
        scores[seed] = {v: report.weighted.f1 for v, report in result.evaluations.items()}
    return scores


class TestAblationOrdering:
    @pytest.mark.parametrize("weaker", [1, 2])
    def test_fused_attention_beats(self, f1_by_seed, weaker):
        wins = sum(s[5] > s[weaker] for s in f1_by_seed.values())
        assert wins >= 4

    def test_attention_fusion_not_behind_linear(self, f1_by_seed):
        wins = sum(s[5] >= s[4] for s in f1_by_seed.values())
        assert wins >= 4


class TestEmergingTopics:
    def test_off_topic_texts_flagged(self, rules, ablation_settings):
        c = ablation_settings.corpus
        corpus = generate_corpus(
            rules,
            c.size,
            c.regex_fraction,
            c.seed,
            c.max_labels,
            off_topic_fraction=c.off_topic_fraction,
        )
        train_set, _ = split_dataset(
            corpus, ablation_settings.training.train_ratio, ablation_settings.training.seed
        )
        model = assemble_model(5, ablation_settings, rules, [s.text for s in train_set])
        model, _ = train(model, train_set, ablation_settings.training)

        tau = ablation_settings.training.threshold
        preds = predict_batch(model, generate_emerging(50, seed=99), tau)
        assert sum(p.is_emerging for p in preds) >= 40
        for pred in preds:
            assert pred.is_emerging == (not pred.topics)
