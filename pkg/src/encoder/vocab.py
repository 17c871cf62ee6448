"""Word-level vocabulary and tokenizer."""

from __future__ import annotations

import logging
import re
import unicodedata
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field

from src.errors import EmptyCorpusError

logger = logging.getLogger(__name__)

PAD_TOKEN = "[PAD]"
CLS_TOKEN = "[CLS]"
UNK_TOKEN = "[UNK]"
SPECIAL_TOKENS = (PAD_TOKEN, CLS_TOKEN, UNK_TOKEN)

DEFAULT_MAX_LEN = 250

# Runs of Unicode letters and digits
_WORD = re.compile(r"[^\W_]+")


def word_tokens(text: str) -> list[str]:
    """NFC-normalise and lowercase, then split on whitespace and punctuation."""
    return _WORD.findall(unicodedata.normalize("NFC", text).lower())


@dataclass(frozen=True)
class Vocabulary:
    """Injective token -> id map; specials occupy ids 0, 1 and 2."""

    tokens: tuple[str, ...]
    token_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.tokens[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise ValueError("vocabulary must start with the special tokens")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        object.__setattr__(self, "token_to_id", index)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def cls_id(self) -> int:
        return 1

    @property
    def unk_id(self) -> int:
        return 2

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, self.unk_id)


def build_vocab(corpus: Iterable[str], min_freq: int = 1) -> Vocabulary:
    """Build a vocabulary from every token seen at least ``min_freq`` times.

    Ids are assigned by descending frequency, ties broken alphabetically, so
    the same corpus always yields the same map.
    """
    texts = list(corpus)
    if not texts:
        raise EmptyCorpusError()

    counts = Counter(tok for text in texts for tok in word_tokens(text))
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_freq and tok not in SPECIAL_TOKENS),
        key=lambda tok: (-counts[tok], tok),
    )
    vocab = Vocabulary(tokens=SPECIAL_TOKENS + tuple(kept))
    logger.info("Built vocabulary of %d tokens from %d texts", vocab.size, len(texts))
    return vocab


def tokenize(text: str, vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> list[int]:
    """``[CLS]`` followed by word ids, truncated to ``max_len`` ids in total."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = [vocab.cls_id] + [vocab.id_of(tok) for tok in word_tokens(text)]
    return ids[:max_len]
