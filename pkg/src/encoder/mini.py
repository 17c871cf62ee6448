"""Trainable desk-scale transformer encoder with CLS pooling."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from src.config import EncoderConfig
from src.encoder.base import TextRepresentation
from src.encoder.vocab import Vocabulary, tokenize
from src.errors import SequenceTooLongError
from src.numerics.kernels import Param, tanh_backward, tanh_forward
from src.numerics.layers import Embedding, Linear, TransformerBlock

logger = logging.getLogger(__name__)


class MiniEncoder:
    """Token + learned position embeddings, ``layers`` attention blocks, tanh pooler.

    The pooled output is ``tanh(h_cls W_p + b_p)`` where ``h_cls`` is the
    final hidden state at position 0.
    """

    trainable = True

    def __init__(self, vocab: Vocabulary, config: EncoderConfig, rng: np.random.Generator) -> None:
        self.vocab = vocab
        self.config = config
        d = config.d_model
        self.tokens = Embedding("encoder.tokens", vocab.size, d, rng)
        self.positions = Embedding("encoder.positions", config.max_seq_len, d, rng)
        self.blocks = [
            TransformerBlock(
                f"encoder.block{i}",
                d,
                config.heads,
                rng,
                layer_norm=config.layer_norm,
                feed_forward=config.feed_forward,
            )
            for i in range(config.layers)
        ]
        self.pooler = Linear("encoder.pooler", d, d, rng)
        self._length = 0
        self._pooled: np.ndarray | None = None

    @property
    def d_model(self) -> int:
        return self.config.d_model

    def parameters(self) -> list[Param]:
        params = self.tokens.parameters() + self.positions.parameters()
        for block in self.blocks:
            params.extend(block.parameters())
        return params + self.pooler.parameters()

    def pool(self, h_cls: np.ndarray) -> np.ndarray:
        pooled, self._pooled = tanh_forward(self.pooler.forward(h_cls))
        return pooled

    def encode_ids(self, ids: Sequence[int], doc_id: str = "") -> TextRepresentation:
        if not ids or ids[0] != self.vocab.cls_id:
            raise ValueError("token ids must be non-empty and start with [CLS]")
        if len(ids) > self.config.max_seq_len:
            raise SequenceTooLongError(len(ids), self.config.max_seq_len)

        self._length = len(ids)
        h = self.tokens.forward(ids) + self.positions.forward(range(len(ids)))
        for block in self.blocks:
            h = block.forward(h)
        return TextRepresentation(doc_id=doc_id, vector=self.pool(h[:1]))

    def encode(self, doc_id: str, text: str) -> TextRepresentation:
        ids = tokenize(text, self.vocab, self.config.max_seq_len)
        return self.encode_ids(ids, doc_id)

    def backward(self, d_vector: np.ndarray) -> None:
        d_cls = self.pooler.backward(tanh_backward(d_vector, self._pooled))
        dh = np.zeros((self._length, self.d_model))
        dh[:1] = d_cls
        for block in reversed(self.blocks):
            dh = block.backward(dh)
        self.positions.backward(dh)
        self.tokens.backward(dh)


def encode_text(ids: Sequence[int], encoder: MiniEncoder, doc_id: str = "") -> TextRepresentation:
    """Pooled representation of an already tokenized sequence."""
    return encoder.encode_ids(ids, doc_id)
