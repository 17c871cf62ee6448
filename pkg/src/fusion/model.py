"""Fusion layers, classifier head and the assembled fusion model."""

from __future__ import annotations

import logging

import numpy as np

from src.config import FusionConfig
from src.encoder.base import TextEncoder, TextRepresentation
from src.errors import ShapeMismatchError
from src.fusion.embedding import (
    RegexEmbeddingTable,
    RegexRows,
    embed_regex_backward,
    embed_regex_features,
)
from src.numerics.kernels import Param, check_finite, relu_backward, relu_forward, sigmoid
from src.numerics.layers import Layer, Linear, TransformerBlock
from src.pipeline.prediction import PredictionSet
from src.rules.rulebook import NUM_TOPICS, TopicRuleSet
from src.rules.tagger import classify_rules_only, tag

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


def sequence_length(config: FusionConfig) -> int:
    """Rows entering fusion: the text vector plus the regex rows."""
    if config.regex_mode == "ordinary":
        return 1 + config.cap
    if config.regex_mode == "bag":
        return 2
    return 1


class AttentionFusion(Layer):
    """One transformer block over ``[text; regex rows]``, read out at position 0."""

    def __init__(self, d_model: int, config: FusionConfig, rng: np.random.Generator) -> None:
        self.block = TransformerBlock(
            "fusion.block",
            d_model,
            config.heads,
            rng,
            layer_norm=config.layer_norm,
            feed_forward=config.feed_forward,
        )
        self.readout = config.readout
        self._mask: np.ndarray | None = None

    @property
    def last_weights(self) -> np.ndarray | None:
        return self.block.last_weights

    def forward(self, seq: np.ndarray, mask: np.ndarray) -> np.ndarray:
        self._mask = mask
        out = self.block.forward(seq, mask)
        if self.readout == "mean":
            return out[mask].mean(axis=0, keepdims=True)
        return out[:1]

    def backward(self, d_fused: np.ndarray) -> np.ndarray:
        mask = self._mask
        d_out = np.zeros((mask.size, d_fused.shape[1]))
        if self.readout == "mean":
            d_out[mask] = d_fused / mask.sum()
        else:
            d_out[:1] = d_fused
        return self.block.backward(d_out)

    def parameters(self) -> list[Param]:
        return self.block.parameters()


class LinearFusion(Layer):
    """``relu(flatten([text; regex rows]) W + b)`` over a fixed-arity input."""

    def __init__(self, d_model: int, seq_len: int, rng: np.random.Generator) -> None:
        self.seq_len = seq_len
        self.d_model = d_model
        self.linear = Linear("fusion.linear", seq_len * d_model, d_model, rng)
        self._active: np.ndarray | None = None

    def forward(self, seq: np.ndarray, mask: np.ndarray) -> np.ndarray:
        if seq.shape != (self.seq_len, self.d_model):
            raise ShapeMismatchError(
                f"linear fusion expects {(self.seq_len, self.d_model)}, got {seq.shape}"
            )
        out, self._active = relu_forward(self.linear.forward(seq.reshape(1, -1)))
        return out

    def backward(self, d_fused: np.ndarray) -> np.ndarray:
        d_flat = self.linear.backward(relu_backward(d_fused, self._active))
        return d_flat.reshape(self.seq_len, self.d_model)

    def parameters(self) -> list[Param]:
        return self.linear.parameters()


class ClassifierHead(Layer):
    """Two-layer FFN: ReLU hidden layer, then one logit per topic."""

    def __init__(self, d_model: int, hidden: int, rng: np.random.Generator) -> None:
        self.hidden = Linear("head.hidden", d_model, hidden, rng)
        self.output = Linear("head.output", hidden, NUM_TOPICS, rng)
        self._active: np.ndarray | None = None

    def forward(self, fused: np.ndarray) -> np.ndarray:
        h, self._active = relu_forward(self.hidden.forward(fused))
        return self.output.forward(h)

    def backward(self, d_logits: np.ndarray) -> np.ndarray:
        return self.hidden.backward(relu_backward(self.output.backward(d_logits), self._active))

    def parameters(self) -> list[Param]:
        return self.hidden.parameters() + self.output.parameters()


def fuse(
    text_vec: TextRepresentation,
    regex: RegexRows | None,
    layer: AttentionFusion | LinearFusion,
    mask_padding: bool = True,
) -> np.ndarray:
    """Stack the text vector over the regex rows and run the fusion layer."""
    if regex is None:
        seq = text_vec.vector
        mask = np.ones(1, dtype=bool)
    else:
        if regex.rows.shape[1] != text_vec.d_model:
            raise ShapeMismatchError(
                f"regex rows have width {regex.rows.shape[1]}, text vector {text_vec.d_model}"
            )
        seq = np.vstack([text_vec.vector, regex.rows])
        regex_mask = regex.mask if mask_padding else np.ones(len(regex), dtype=bool)
        mask = np.concatenate([[True], regex_mask])
    return layer.forward(seq, mask)


def classify(fused: np.ndarray, head: ClassifierHead) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(probabilities, logits)``; probabilities lie strictly inside (0, 1)."""
    check_finite(fused, "fused representation")
    logits = head.forward(fused)
    probabilities = np.clip(sigmoid(logits[0]), PROB_FLOOR, 1.0 - PROB_FLOOR)
    return probabilities, logits


class FusionModel:
    """Text encoder, regex embeddings, fusion layer and classifier head."""

    trainable = True

    def __init__(
        self,
        variant: int,
        encoder: TextEncoder,
        rules: TopicRuleSet,
        config: FusionConfig,
        rng: np.random.Generator,
    ) -> None:
        self.variant = variant
        self.encoder = encoder
        self.rules = rules
        self.config = config
        d = encoder.d_model
        if d % config.heads:
            raise ShapeMismatchError(f"fusion heads={config.heads} must divide d_model={d}")

        self.regex_table = RegexEmbeddingTable(d, rng) if config.regex_mode != "none" else None
        if config.fusion_layer == "linear":
            self.fusion: AttentionFusion | LinearFusion = LinearFusion(
                d, sequence_length(config), rng
            )
        else:
            self.fusion = AttentionFusion(d, config, rng)
        self.head = ClassifierHead(d, config.head_hidden or d, rng)
        self._regex: RegexRows | None = None

    @property
    def d_model(self) -> int:
        return self.encoder.d_model

    def parameters(self) -> list[Param]:
        params = list(self.encoder.parameters())
        if self.regex_table is not None:
            params.extend(self.regex_table.parameters())
        return params + self.fusion.parameters() + self.head.parameters()

    def forward(self, text: str, doc_id: str = "") -> np.ndarray:
        """Logits (1 x 27) for one document; caches state for :meth:`backward`."""
        representation = self.encoder.encode(doc_id, text)
        self._regex = None
        if self.regex_table is not None:
            features = tag(text, self.rules, cap=self.config.cap, doc_id=doc_id)
            self._regex = embed_regex_features(
                features, self.regex_table, self.config.regex_mode, self.config.cap
            )
        fused = fuse(representation, self._regex, self.fusion, self.config.mask_padding)
        check_finite(fused, "fused representation")
        return self.head.forward(fused)

    def backward(self, d_logits: np.ndarray) -> None:
        d_seq = self.fusion.backward(self.head.backward(d_logits))
        if self._regex is not None:
            embed_regex_backward(d_seq[1:], self._regex)
        self.encoder.backward(d_seq[:1])

    def predict_proba(self, text: str, doc_id: str = "") -> np.ndarray:
        logits = self.forward(text, doc_id)
        return np.clip(sigmoid(logits[0]), PROB_FLOOR, 1.0 - PROB_FLOOR)

    def predict(self, text: str, doc_id: str = "", threshold: float = 0.5) -> PredictionSet:
        return PredictionSet.from_probabilities(
            doc_id, self.predict_proba(text, doc_id), self.rules.names, threshold
        )


class RuleOnlyModel:
    """Regex-only baseline; holds no parameters."""

    trainable = False

    def __init__(self, rules: TopicRuleSet, variant: int = 1) -> None:
        self.rules = rules
        self.variant = variant

    def parameters(self) -> list[Param]:
        return []

    def predict(self, text: str, doc_id: str = "", threshold: float = 0.5) -> PredictionSet:
        return classify_rules_only(text, self.rules, doc_id)


def count_parameters(params: list[Param]) -> int:
    return sum(p.size for p in params)
