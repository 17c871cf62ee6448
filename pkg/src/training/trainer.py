"""Mini-batch training with validation monitoring and best-epoch selection."""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from src.config import TrainConfig
from src.errors import (
    ExportError,
    NonFiniteLossError,
    TooFewSamplesError,
    ZeroTotalSupportError,
)
from src.evaluation.metrics import per_class_metrics, weighted_metrics
from src.fusion.model import PROB_FLOOR, FusionModel
from src.numerics.checkpoint import restore, snapshot
from src.numerics.kernels import bce_with_logits, sigmoid
from src.numerics.optim import AdamW
from src.pipeline.prediction import PredictionSet
from src.training.data import LabeledSample, make_target_matrix

logger = logging.getLogger(__name__)


@dataclass
class TrainHistory:
    """Per-epoch losses, validation F1 and timings; ``best_epoch`` is 0-based."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_f1: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch]

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "val_f1": self.val_f1,
        }
        if include_timing:
            data["seconds"] = self.seconds
        return data

    def save(self, path: str | Path, include_timing: bool = False) -> Path:
        out = Path(path)
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(self.to_dict(include_timing), indent=2) + "\n")
        except OSError as exc:
            raise ExportError(f"Cannot write history {out}: {exc}") from exc
        return out


def carve_validation(
    samples: Sequence[LabeledSample],
    val_fraction: float,
    rng: np.random.Generator,
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Shuffle, then hold out the last ``val_fraction`` (at least one sample)."""
    order = rng.permutation(len(samples))
    n_val = max(1, int(round(len(samples) * val_fraction)))
    fit = [samples[i] for i in order[:-n_val]]
    val = [samples[i] for i in order[-n_val:]]
    return fit, val


def mean_loss(model: FusionModel, samples: Sequence[LabeledSample], targets: np.ndarray) -> float:
    total = 0.0
    for sample, target in zip(samples, targets):
        loss, _ = bce_with_logits(model.forward(sample.text, sample.doc_id), target)
        total += loss
    return total / len(samples)


def validation_scores(
    model: FusionModel,
    samples: Sequence[LabeledSample],
    targets: np.ndarray,
    threshold: float,
) -> tuple[float, float]:
    """Mean loss and support-weighted F1 at ``threshold``.

    F1 is 0.0 when no validation sample carries a topic.
    """
    total = 0.0
    preds = []
    for sample, target in zip(samples, targets):
        logits = model.forward(sample.text, sample.doc_id)
        loss, _ = bce_with_logits(logits, target)
        total += loss
        probabilities = np.clip(sigmoid(logits[0]), PROB_FLOOR, 1.0 - PROB_FLOOR)
        preds.append(
            PredictionSet.from_probabilities(
                sample.doc_id, probabilities, model.rules.names, threshold
            )
        )
    per_class = per_class_metrics(preds, [s.labels for s in samples], model.rules.names)
    try:
        f1 = weighted_metrics(per_class).f1
    except ZeroTotalSupportError:
        f1 = 0.0
    return total / len(samples), f1


def train(
    model: FusionModel,
    samples: Sequence[LabeledSample],
    cfg: TrainConfig,
    validation: Sequence[LabeledSample] | None = None,
) -> tuple[FusionModel, TrainHistory]:
    """Fit ``model`` with AdamW on mean binary cross-entropy.

    Without an explicit ``validation`` set, ``cfg.val_fraction`` of
    ``samples`` is held out. ``samples`` must hold at least one full batch;
    the last batch of an epoch may be partial.

    With ``cfg.monitor == "loss"`` the best epoch has the lowest validation
    loss. With ``"f1"`` it has the highest validation F1 at
    ``cfg.threshold``, ties going to the lower loss. Training stops at
    ``cfg.max_epochs`` or after ``cfg.patience`` epochs without a strictly
    better score; the parameters of the best epoch are restored.
    """
    rng = np.random.default_rng(cfg.seed)
    needed = max(cfg.batch_size, 2 if validation is None else 1)
    if len(samples) < needed:
        raise TooFewSamplesError(len(samples), needed)
    if validation is None:
        fit, val = carve_validation(samples, cfg.val_fraction, rng)
    else:
        fit, val = list(samples), list(validation)
    if not val:
        raise TooFewSamplesError(0, 1)

    rules = model.rules
    fit_targets = make_target_matrix(fit, rules)
    val_targets = make_target_matrix(val, rules)
    params = model.parameters()
    optimizer = AdamW(
        params,
        lr=cfg.lr,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        weight_decay=cfg.weight_decay,
    )
    optimizer.zero_grad()
    logger.info(
        "Training variant %d on %d samples (%d held out), %d epochs max",
        model.variant,
        len(fit),
        len(val),
        cfg.max_epochs,
    )

    history = TrainHistory()
    best_weights = snapshot(params)
    best_score: tuple[float, ...] | None = None
    stale = 0
    for epoch in range(cfg.max_epochs):
        start = time.perf_counter()
        order = rng.permutation(len(fit))
        epoch_loss = 0.0
        for batch_idx, begin in enumerate(range(0, len(order), cfg.batch_size)):
            batch = order[begin : begin + cfg.batch_size]
            batch_loss = 0.0
            for i in batch:
                logits = model.forward(fit[i].text, fit[i].doc_id)
                loss, d_logits = bce_with_logits(logits, fit_targets[i])
                model.backward(d_logits / len(batch))
                batch_loss += loss
            if not np.isfinite(batch_loss):
                raise NonFiniteLossError(epoch, batch_idx)
            optimizer.step()
            epoch_loss += batch_loss
            logger.debug("epoch %d batch %d loss %.6f", epoch, batch_idx, batch_loss / len(batch))

        val_loss, val_f1 = validation_scores(model, val, val_targets, cfg.threshold)
        if not np.isfinite(val_loss):
            raise NonFiniteLossError(epoch, -1)
        history.train_loss.append(epoch_loss / len(fit))
        history.val_loss.append(val_loss)
        history.val_f1.append(val_f1)
        history.seconds.append(time.perf_counter() - start)
        logger.info(
            "epoch %d/%d train_loss=%.5f val_loss=%.5f val_f1=%.4f (%.1fs)",
            epoch + 1,
            cfg.max_epochs,
            history.train_loss[-1],
            val_loss,
            val_f1,
            history.seconds[-1],
        )

        score = (val_f1, -val_loss) if cfg.monitor == "f1" else (-val_loss,)
        if best_score is None or score > best_score:
            best_score = score
            history.best_epoch = epoch
            best_weights = snapshot(params)
            stale = 0
        else:
            stale += 1
            if cfg.patience is not None and stale >= cfg.patience:
                history.stopped_early = True
                logger.info(
                    "Early stop after epoch %d: no improvement in %d epochs", epoch + 1, stale
                )
                break

    restore(params, best_weights)
    best = history.best_epoch
    logger.info(
        "Best epoch %d (val_loss=%.5f val_f1=%.4f)",
        best + 1,
        history.val_loss[best],
        history.val_f1[best],
    )
    return model, history
