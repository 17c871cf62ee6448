"""Configuration management for the topic fusion classifier."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent.resolve()
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "configs" / "default.yaml"
DEFAULT_RULEBOOK_PATH = PROJECT_ROOT / "configs" / "rulebook.tsv"


class RulebookConfig(BaseModel):
    """Location of the topic rule set."""

    path: str = str(DEFAULT_RULEBOOK_PATH)


class EncoderConfig(BaseModel):
    """Text encoder configuration.

    ``kind="mini"`` trains a small transformer encoder end to end;
    ``kind="precomputed"`` reads frozen vectors from ``vectors_path``.
    """

    kind: Literal["mini", "precomputed"] = "mini"
    d_model: int = 64
    max_seq_len: int = 250
    layers: int = 2
    heads: int = 4
    min_freq: int = 1
    layer_norm: bool = True
    feed_forward: bool = True
    vectors_path: str | None = None

    @model_validator(mode="after")
    def _check_shapes(self) -> EncoderConfig:
        if self.d_model < 1 or self.heads < 1 or self.d_model % self.heads:
            raise ValueError(f"d_model={self.d_model} must be divisible by heads={self.heads}")
        if self.max_seq_len < 1:
            raise ValueError("max_seq_len must be >= 1")
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.kind == "precomputed" and not self.vectors_path:
            raise ValueError("precomputed encoder requires vectors_path")
        return self


class FusionConfig(BaseModel):
    """Fusion layer and classifier head configuration."""

    regex_mode: Literal["none", "ordinary", "bag"] = "ordinary"
    fusion_layer: Literal["self_attention", "linear"] = "self_attention"
    heads: int = 4
    cap: int = 7
    mask_padding: bool = True
    head_hidden: int | None = None
    readout: Literal["position0", "mean"] = "position0"
    layer_norm: bool = False
    feed_forward: bool = False

    @field_validator("heads", "cap")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value


class TrainConfig(BaseModel):
    """Training loop, optimizer and split configuration."""

    lr: float = 2e-5
    batch_size: int = 8
    max_epochs: int = 30
    val_fraction: float = 0.15
    train_ratio: float = 0.7
    seed: int = 42
    threshold: float = 0.5
    patience: int | None = 5
    monitor: Literal["loss", "f1"] = "loss"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01

    @model_validator(mode="after")
    def _check_ranges(self) -> TrainConfig:
        if not 0.0 < self.val_fraction < 0.5:
            raise ValueError("val_fraction must lie in (0, 0.5)")
        if not 0.0 < self.train_ratio < 1.0:
            raise ValueError("train_ratio must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.lr <= 0.0:
            raise ValueError("lr must be positive")
        return self


class CorpusConfig(BaseModel):
    """Synthetic survey corpus generator configuration."""

    size: int = 400
    regex_fraction: float = 0.75
    emerging_size: int = 50
    seed: int = 7
    max_labels: int = 2
    off_topic_fraction: float = 0.0

    @field_validator("size", "emerging_size", "max_labels")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("regex_fraction", "off_topic_fraction")
    @classmethod
    def _fraction(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("must lie in [0, 1]")
        return value


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = "INFO"
    format: str = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"
    file: str = "logs/topic-fusion.log"


class Settings(BaseModel):
    """Root configuration for the topic fusion classifier."""

    variant: int = 5
    output_dir: str = "runs"
    rulebook: RulebookConfig = Field(default_factory=RulebookConfig)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    fusion: FusionConfig = Field(default_factory=FusionConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @field_validator("variant")
    @classmethod
    def _known_variant(cls, value: int) -> int:
        if value not in range(1, 6):
            raise ValueError(f"variant must be 1..5, got {value}")
        return value

    @model_validator(mode="after")
    def _fusion_heads_divide(self) -> Settings:
        if self.encoder.d_model % self.fusion.heads:
            raise ValueError(
                f"fusion heads={self.fusion.heads} must divide d_model={self.encoder.d_model}"
            )
        return self


def load_config(path: str | Path | None = None) -> Settings:
    """Load configuration from a YAML (or JSON) file.

    Args:
        path: Path to config file. Uses default if not provided.

    Returns:
        Validated Settings instance.
    """
    config_path = Path(path) if path else DEFAULT_CONFIG_PATH

    raw: dict[str, Any] = {}
    if config_path.exists():
        with open(config_path) as f:
            raw = yaml.safe_load(f) or {}
        logger.info("Loaded config from %s", config_path)
    else:
        logger.warning("Config file not found at %s, using defaults", config_path)

    return Settings(**raw)


# CLI flag -> (section, field)
_OVERRIDES = {
    "variant": (None, "variant"),
    "seed": ("training", "seed"),
    "threshold": ("training", "threshold"),
    "d_model": ("encoder", "d_model"),
    "epochs": ("training", "max_epochs"),
    "lr": ("training", "lr"),
    "batch_size": ("training", "batch_size"),
    "rulebook": ("rulebook", "path"),
    "vectors": ("encoder", "vectors_path"),
}


def apply_overrides(settings: Settings, **overrides: Any) -> Settings:
    """Return a re-validated copy of ``settings`` with flag overrides applied.

    ``None`` values are ignored. Passing ``vectors`` also switches the
    encoder to the precomputed kind.
    """
    data = settings.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _OVERRIDES:
            raise KeyError(f"Unknown override: {key}")
        section, name = _OVERRIDES[key]
        target = data if section is None else data[section]
        target[name] = value
        if key == "vectors":
            data["encoder"]["kind"] = "precomputed"
    return Settings.model_validate(data)


def resolve_path(path: str | Path) -> Path:
    """Relative paths are tried against the working directory, then the project root."""
    candidate = Path(path)
    if candidate.is_absolute() or candidate.exists():
        return candidate
    return PROJECT_ROOT / candidate


def setup_logging(config: LoggingConfig) -> None:
    """Configure application-wide logging."""
    log_file = PROJECT_ROOT / config.file
    log_file.parent.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=getattr(logging, config.level.upper(), logging.INFO),
        format=config.format,
        handlers=[
            logging.StreamHandler(),
            logging.FileHandler(log_file),
        ],
    )

    # Suppress noisy library logs
    for noisy in ("markdown_it", "asyncio"):
        logging.getLogger(noisy).setLevel(logging.WARNING)
