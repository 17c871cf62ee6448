"""Saving and loading trained models (checkpoint plus JSON sidecar)."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ValidationError

from src.config import EncoderConfig, FusionConfig
from src.encoder.base import TextEncoder
from src.encoder.mini import MiniEncoder
from src.encoder.precomputed import load_precomputed_vectors
from src.encoder.vocab import Vocabulary
from src.errors import CheckpointFormatError, ExportError, MissingFileError
from src.fusion.model import FusionModel, RuleOnlyModel
from src.numerics.checkpoint import load_checkpoint, save_checkpoint
from src.rules.rulebook import TopicRuleSet

logger = logging.getLogger(__name__)

SIDECAR_NAME = "model.json"
CHECKPOINT_NAME = "model.ckpt"


class ModelSidecar(BaseModel):
    """Everything needed to rebuild a model's shapes before loading weights."""

    format_version: int = 1
    variant: int
    fusion: FusionConfig | None = None
    encoder: EncoderConfig | None = None
    vocab: list[str] | None = None


def save_model(model: FusionModel | RuleOnlyModel, directory: str | Path) -> Path:
    """Write ``model.json`` (and ``model.ckpt`` for trainable variants)."""
    out = Path(directory)
    sidecar = ModelSidecar(variant=model.variant)
    if isinstance(model, FusionModel):
        encoder = model.encoder
        sidecar.fusion = model.config
        if isinstance(encoder, MiniEncoder):
            sidecar.encoder = encoder.config
            sidecar.vocab = list(encoder.vocab.tokens)
        else:
            sidecar.encoder = EncoderConfig(
                kind="precomputed",
                d_model=encoder.d_model,
                vectors_path=getattr(encoder, "source", None) or "<in-memory>",
            )

    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / SIDECAR_NAME).write_text(sidecar.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"Cannot write model sidecar to {out}: {exc}") from exc
    if isinstance(model, FusionModel):
        save_checkpoint(model.parameters(), out / CHECKPOINT_NAME)
    logger.info("Saved variant %d model to %s", model.variant, out)
    return out


def load_model(
    directory: str | Path,
    rules: TopicRuleSet,
    encoder: TextEncoder | None = None,
) -> FusionModel | RuleOnlyModel:
    """Rebuild a model saved by :func:`save_model`.

    A precomputed-vector model reloads its vectors from the recorded path
    unless ``encoder`` is supplied.
    """
    src = Path(directory)
    sidecar_path = src / SIDECAR_NAME
    if not sidecar_path.is_file():
        raise MissingFileError(sidecar_path)
    try:
        sidecar = ModelSidecar.model_validate_json(sidecar_path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise CheckpointFormatError(f"{sidecar_path}: invalid sidecar: {exc}") from exc

    if sidecar.fusion is None or sidecar.encoder is None:
        return RuleOnlyModel(rules, variant=sidecar.variant)

    rng = np.random.default_rng(0)
    if encoder is None:
        if sidecar.encoder.kind == "precomputed":
            cfg = sidecar.encoder
            encoder = load_precomputed_vectors(cfg.vectors_path, cfg.d_model)
        else:
            if not sidecar.vocab:
                raise CheckpointFormatError(f"{sidecar_path}: mini encoder without a vocabulary")
            encoder = MiniEncoder(Vocabulary(tokens=tuple(sidecar.vocab)), sidecar.encoder, rng)

    model = FusionModel(sidecar.variant, encoder, rules, sidecar.fusion, rng)
    load_checkpoint(model.parameters(), src / CHECKPOINT_NAME)
    return model
