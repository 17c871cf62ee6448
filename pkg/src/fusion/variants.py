"""The five ablation variants and model assembly."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from src.config import FusionConfig, Settings
from src.encoder.base import TextEncoder
from src.encoder.mini import MiniEncoder
from src.encoder.precomputed import load_precomputed_vectors
from src.encoder.vocab import Vocabulary, build_vocab
from src.errors import UnknownVariantError
from src.fusion.model import FusionModel, RuleOnlyModel, count_parameters
from src.rules.rulebook import TopicRuleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VariantSpec:
    """One row of the ablation matrix."""

    variant: int
    text_channel: str
    regex_channel: str
    fusion_label: str
    regex_mode: str | None
    fusion_layer: str | None


VARIANTS: dict[int, VariantSpec] = {
    1: VariantSpec(1, "None", "Regex", "N/A", None, None),
    2: VariantSpec(2, "Text encoder", "N/A", "SelfAttention", "none", "self_attention"),
    3: VariantSpec(
        3, "Text encoder", "RegexEmbeddingBag", "SelfAttention", "bag", "self_attention"
    ),
    4: VariantSpec(4, "Text encoder", "RegexEmbedding", "Linear", "ordinary", "linear"),
    5: VariantSpec(
        5, "Text encoder", "RegexEmbedding", "SelfAttention", "ordinary", "self_attention"
    ),
}


def variant_spec(variant: int) -> VariantSpec:
    try:
        return VARIANTS[variant]
    except (KeyError, TypeError):
        raise UnknownVariantError(variant) from None


def variant_fusion_config(variant: int, base: FusionConfig) -> FusionConfig:
    """``base`` with the regex mode and fusion layer the variant prescribes."""
    spec = variant_spec(variant)
    if spec.regex_mode is None:
        return base
    return base.model_copy(
        update={"regex_mode": spec.regex_mode, "fusion_layer": spec.fusion_layer}
    )


def build_encoder(
    settings: Settings,
    texts: Iterable[str],
    rng: np.random.Generator,
    vocab: Vocabulary | None = None,
) -> TextEncoder:
    """Create the configured text encoder.

    The mini encoder builds its vocabulary from ``texts`` unless one is given.
    """
    cfg = settings.encoder
    if cfg.kind == "precomputed":
        return load_precomputed_vectors(cfg.vectors_path, cfg.d_model)
    if vocab is None:
        vocab = build_vocab(texts, min_freq=cfg.min_freq)
    return MiniEncoder(vocab, cfg, rng)


def assemble_model(
    variant: int,
    settings: Settings,
    rules: TopicRuleSet,
    texts: Iterable[str] = (),
    seed: int | None = None,
    encoder: TextEncoder | None = None,
    vocab: Vocabulary | None = None,
) -> FusionModel | RuleOnlyModel:
    """Build the model for ``variant``.

    Variant 1 is the rules-only baseline. Variants 2-5 share one parameter
    initialisation stream seeded from ``seed`` (default: the training seed),
    drawn encoder first.
    """
    spec = variant_spec(variant)
    if spec.regex_mode is None:
        logger.info("Assembled variant 1 (rules only)")
        return RuleOnlyModel(rules, variant=1)

    rng = np.random.default_rng(settings.training.seed if seed is None else seed)
    if encoder is None:
        encoder = build_encoder(settings, texts, rng, vocab=vocab)
    config = variant_fusion_config(variant, settings.fusion)
    model = FusionModel(variant, encoder, rules, config, rng)
    logger.info(
        "Assembled variant %d (%s + %s, %s fusion): %d parameters",
        variant,
        spec.text_channel,
        spec.regex_channel,
        spec.fusion_label,
        count_parameters(model.parameters()),
    )
    return model
