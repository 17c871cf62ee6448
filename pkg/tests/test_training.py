"""Tests for dataset splitting, target matrices and the training loop."""

from __future__ import annotations

import json

import numpy as np
import pytest

from src.config import EncoderConfig, FusionConfig, LoggingConfig, Settings, TrainConfig
from src.errors import EmptyDatasetError, NonFiniteLossError, TooFewSamplesError, UnknownLabelError
from src.fusion.persistence import CHECKPOINT_NAME, save_model
from src.fusion.variants import assemble_model
from src.pipeline.corpus import generate_corpus
from src.pipeline.inference import evaluate_model
from src.rules.rulebook import NUM_TOPICS
from src.training.data import (
    LabeledSample,
    label_distribution,
    make_target_matrix,
    split_dataset,
)
from src.training.trainer import (
    TrainHistory,
    carve_validation,
    mean_loss,
    train,
    validation_scores,
)


def _samples(n):
    return [LabeledSample(f"d{i}", f"text {i}", set()) for i in range(n)]


class TestLabeledSample:
    def test_labels_become_frozenset(self):
        sample = LabeledSample("a", "text", ["X", "Y"])
        assert sample.labels == frozenset({"X", "Y"})

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            LabeledSample("a", "   ", set())


class TestSplitDataset:
    def test_published_split_sizes(self):
        train_set, test_set = split_dataset(_samples(541), 0.7, seed=42)
        assert (len(train_set), len(test_set)) == (379, 162)

    def test_partition(self):
        train_set, test_set = split_dataset(_samples(50), 0.7, seed=1)
        ids = [s.doc_id for s in train_set + test_set]
        assert sorted(ids) == sorted(s.doc_id for s in _samples(50))

    def test_same_seed_same_split(self):
        assert split_dataset(_samples(30), seed=5) == split_dataset(_samples(30), seed=5)

    def test_different_seed_differs(self):
        assert split_dataset(_samples(30), seed=5) != split_dataset(_samples(30), seed=6)

    def test_empty(self):
        with pytest.raises(EmptyDatasetError):
            split_dataset([])

    def test_bad_ratio(self):
        with pytest.raises(ValueError):
            split_dataset(_samples(5), train_ratio=1.0)


class TestTargets:
    def test_target_matrix(self, rules, tiny_samples):
        targets = make_target_matrix(tiny_samples, rules)
        assert targets.shape == (6, NUM_TOPICS)
        assert targets[2].nonzero()[0].tolist() == [3, 4]
        assert not targets[4].any()

    def test_unknown_label(self, rules):
        with pytest.raises(UnknownLabelError):
            make_target_matrix([LabeledSample("a", "text", {"Weather"})], rules)

    def test_label_distribution(self, rules, tiny_samples):
        counts = label_distribution(tiny_samples, rules)
        assert len(counts) == NUM_TOPICS
        assert counts[3].count == 2
        assert sum(c.count for c in counts) == 6
        assert sum(c.percent for c in counts) == pytest.approx(100.0)


class TestCarveValidation:
    def test_last_fraction_held_out(self):
        fit, val = carve_validation(_samples(20), 0.15, np.random.default_rng(0))
        assert (len(fit), len(val)) == (17, 3)

    def test_at_least_one(self):
        fit, val = carve_validation(_samples(3), 0.15, np.random.default_rng(0))
        assert len(val) == 1


class TestTrainer:
    def test_history_recorded(self, rules, test_settings, samples):
        model = assemble_model(5, test_settings, rules, [s.text for s in samples])
        model, history = train(model, samples, test_settings.training)
        assert 1 <= history.epochs <= 3
        assert len(history.val_loss) == history.epochs
        assert 0 <= history.best_epoch < history.epochs
        assert all(np.isfinite(history.train_loss))

    def test_best_parameters_restored(self, rules, test_settings, samples):
        model = assemble_model(5, test_settings, rules, [s.text for s in samples])
        val = samples[:10]
        model, history = train(model, samples[10:], test_settings.training, validation=val)
        reloaded = mean_loss(model, val, make_target_matrix(val, rules))
        assert reloaded == pytest.approx(history.best_val_loss, rel=1e-12)

    def test_early_stopping(self, rules, test_settings, samples):
        """Validation labels are the complement of the training labels, so val loss rises."""
        names = set(rules.names)
        flipped = [LabeledSample(s.doc_id, s.text, names - s.labels) for s in samples[:12]]
        cfg = test_settings.training.model_copy(update={"max_epochs": 20, "patience": 2})
        model = assemble_model(5, test_settings, rules, [s.text for s in samples])
        model, history = train(model, samples[:12], cfg, validation=flipped)
        assert history.stopped_early
        assert history.epochs == history.best_epoch + 1 + cfg.patience
        assert history.epochs < cfg.max_epochs

    def test_single_batch_loss_decreases(self, rules, test_settings, tiny_samples):
        batch = tiny_samples[:4]
        cfg = TrainConfig(lr=1e-3, batch_size=4, max_epochs=10, patience=None, seed=1)
        model = assemble_model(5, test_settings, rules, [s.text for s in batch])
        _, history = train(model, batch, cfg, validation=batch)
        assert history.epochs == 10
        losses = history.train_loss
        assert all(later <= earlier for earlier, later in zip(losses, losses[1:]))
        assert losses[-1] < losses[0]

    def test_too_few_samples(self, rules, test_settings, tiny_samples):
        model = assemble_model(5, test_settings, rules, [s.text for s in tiny_samples])
        cfg = test_settings.training.model_copy(update={"batch_size": 8})
        with pytest.raises(TooFewSamplesError):
            train(model, tiny_samples, cfg)

    def test_exactly_one_batch_trains(self, rules, test_settings, samples):
        data = samples[:8]
        cfg = test_settings.training.model_copy(update={"batch_size": 8, "max_epochs": 2})
        model = assemble_model(5, test_settings, rules, [s.text for s in data])
        _, history = train(model, data, cfg)
        assert history.epochs == 2

    def test_f1_monitor_keeps_best_f1_epoch(self, rules, test_settings, samples):
        cfg = test_settings.training.model_copy(
            update={"monitor": "f1", "max_epochs": 6, "patience": None, "lr": 1e-2}
        )
        val = samples[:12]
        model = assemble_model(5, test_settings, rules, [s.text for s in samples])
        model, history = train(model, samples[12:], cfg, validation=val)
        scores = list(zip(history.val_f1, [-loss for loss in history.val_loss]))
        assert history.best_epoch == scores.index(max(scores))
        loss, f1 = validation_scores(model, val, make_target_matrix(val, rules), cfg.threshold)
        assert f1 == pytest.approx(history.val_f1[history.best_epoch], abs=1e-12)
        assert loss == pytest.approx(history.val_loss[history.best_epoch], rel=1e-12)
        assert history.to_dict()["val_f1"] == history.val_f1

    def test_non_finite_loss(self, rules, test_settings, samples):
        model = assemble_model(5, test_settings, rules, [s.text for s in samples])
        model.head.output.bias.value[0, 0] = np.nan
        with pytest.raises(NonFiniteLossError) as info:
            train(model, samples, test_settings.training)
        assert (info.value.epoch, info.value.batch) == (0, 0)

    def test_same_seed_identical_runs(self, rules, test_settings, samples, tmp_path):
        outputs = []
        for run in ("a", "b"):
            model = assemble_model(5, test_settings, rules, [s.text for s in samples])
            model, history = train(model, samples, test_settings.training)
            save_model(model, tmp_path / run)
            outputs.append((history.to_dict(), (tmp_path / run / CHECKPOINT_NAME).read_bytes()))
        assert outputs[0] == outputs[1]

    def test_history_file_has_no_timing_by_default(self, tmp_path):
        history = TrainHistory(train_loss=[0.5], val_loss=[0.4], seconds=[1.2], best_epoch=0)
        data = json.loads(history.save(tmp_path / "history.json").read_text())
        assert "seconds" not in data
        assert data["best_epoch"] == 0
        assert "seconds" in history.to_dict(include_timing=True)


class TestOverfit:
    def test_memorizes_eight_samples(self, rules):
        settings = Settings(
            encoder=EncoderConfig(d_model=32, heads=4, layers=1, max_seq_len=64),
            fusion=FusionConfig(heads=4),
            training=TrainConfig(lr=1e-3, batch_size=1, max_epochs=200, patience=None, seed=0),
            logging=LoggingConfig(level="WARNING"),
        )
        data = generate_corpus(rules, size=8, regex_fraction=1.0, seed=5)
        model = assemble_model(5, settings, rules, [s.text for s in data])
        model, _ = train(model, data, settings.training, validation=data)
        report = evaluate_model(model, data, threshold=0.5)
        assert report.weighted.f1 == pytest.approx(1.0)
