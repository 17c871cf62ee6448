"""Shared test fixtures for the topic fusion test suite."""

from __future__ import annotations

import numpy as np
import pytest

from src.config import (
    DEFAULT_RULEBOOK_PATH,
    EncoderConfig,
    FusionConfig,
    LoggingConfig,
    Settings,
    TrainConfig,
)
from src.encoder.precomputed import PrecomputedEncoder
from src.pipeline.corpus import generate_corpus
from src.rules.rulebook import load_rulebook
from src.training.data import LabeledSample


@pytest.fixture(scope="session")
def rules():
    """The reference rulebook shipped in configs/."""
    return load_rulebook(DEFAULT_RULEBOOK_PATH)


@pytest.fixture
def test_settings():
    """Tiny model and fast training for unit tests."""
    return Settings(
        variant=5,
        encoder=EncoderConfig(d_model=8, heads=2, layers=1, max_seq_len=64),
        fusion=FusionConfig(heads=2, cap=7),
        training=TrainConfig(lr=1e-3, batch_size=4, max_epochs=3, patience=2, seed=11),
        logging=LoggingConfig(level="WARNING"),
    )


@pytest.fixture
def samples(rules):
    """Sixty synthetic labeled responses."""
    return generate_corpus(rules, size=60, regex_fraction=0.75, seed=3)


@pytest.fixture
def tiny_samples(rules):
    """Hand-written samples covering matched, multi-topic and unmatched text."""
    return [
        LabeledSample("a", "The agent was rude to me.", {rules.name_of(3)}),
        LabeledSample("b", "Nobody called me back.", {rules.name_of(11)}),
        LabeledSample(
            "c",
            "The agent was rude and the service was terrible.",
            {rules.name_of(3), rules.name_of(4)},
        ),
        LabeledSample("d", "My claim was denied.", {rules.name_of(16)}),
        LabeledSample("e", "The parking near your city office is limited.", set()),
        LabeledSample("f", "I forgot my password.", {rules.name_of(25)}),
    ]


@pytest.fixture
def vectors_for():
    """Factory: seeded random frozen vectors for the given doc ids."""

    def make(doc_ids, d_model=8, seed=0):
        rng = np.random.default_rng(seed)
        return {doc_id: rng.normal(size=d_model) for doc_id in doc_ids}

    return make


@pytest.fixture
def frozen_encoder(tiny_samples, vectors_for):
    """Precomputed encoder holding a d=8 vector per tiny sample."""
    return PrecomputedEncoder.from_vectors(vectors_for([s.doc_id for s in tiny_samples]))
