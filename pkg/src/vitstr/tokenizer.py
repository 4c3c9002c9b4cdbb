"""Character vocabulary with [GO]/[s] control tokens and greedy decoding."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

GO = "[GO]"
EOS = "[s]"
GO_ID = 0
EOS_ID = 1


class VocabularyError(ValueError):
    pass


class LengthError(ValueError):
    pass


class Vocabulary:
    """Ordered symbols: ``[GO]`` at 0, ``[s]`` at 1, then the character set."""

    def __init__(self, chars: Iterable[str]):
        chars = list(chars)
        seen = set()
        for ch in chars:
            if ch in (GO, EOS):
                raise VocabularyError(f"control token {ch!r} cannot be part of the character set")
            if len(ch) != 1:
                raise VocabularyError(f"symbol {ch!r} is not a single character")
            if ch in seen:
                raise VocabularyError(f"duplicate character {ch!r}")
            seen.add(ch)
        self.chars = tuple(chars)
        self.symbols = (GO, EOS) + self.chars
        self._index = {s: i for i, s in enumerate(self.symbols)}

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, ch: str) -> bool:
        return ch in self._index and ch not in (GO, EOS)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.symbols == other.symbols

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise VocabularyError(f"character {symbol!r} is not in the vocabulary") from None

    def validate(self, text: str, max_len: int | None = None) -> None:
        if max_len is not None and len(text) > max_len:
            raise LengthError(f"text {text!r} has {len(text)} characters, limit is {max_len}")
        for ch in text:
            if ch not in self:
                raise VocabularyError(f"character {ch!r} is not in the vocabulary")

    def encode(self, text: str, seq_len: int) -> np.ndarray:
        """[GO], character ids, then [s] up to ``seq_len``."""
        self.validate(text, seq_len - 2)
        ids = np.full(seq_len, EOS_ID, dtype=np.int64)
        ids[0] = GO_ID
        ids[1 : len(text) + 1] = [self._index[ch] for ch in text]
        return ids

    def encode_batch(self, texts: Sequence[str], seq_len: int) -> np.ndarray:
        return np.stack([self.encode(t, seq_len) for t in texts]) if texts else np.zeros((0, seq_len), np.int64)

    def decode_ids(self, ids: Sequence[int]) -> str:
        """Text from positions 1.., stopping at the first [s]."""
        out = []
        for i in list(ids)[1:]:
            if i == EOS_ID:
                break
            if i != GO_ID:
                out.append(self.symbols[i])
        return "".join(out)

    def decode_greedy(self, logits) -> tuple[str, float]:
        """Argmax decode of one [S, K] logit matrix; returns (text, confidence)."""
        arr = np.asarray(getattr(logits, "data", logits), dtype=np.float64)
        shifted = arr - arr.max(axis=-1, keepdims=True)
        probs = np.exp(shifted)
        probs /= probs.sum(axis=-1, keepdims=True)
        ids = arr.argmax(axis=-1)
        text = []
        confidence = 1.0
        for pos in range(1, arr.shape[0]):
            i = int(ids[pos])
            confidence *= float(probs[pos, i])
            if i == EOS_ID:
                break
            if i != GO_ID:
                text.append(self.symbols[i])
        return "".join(text), confidence

    def decode_batch(self, logits) -> list[str]:
        arr = np.asarray(getattr(logits, "data", logits))
        return [self.decode_ids(row) for row in arr.argmax(axis=-1)]

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(ch + "\n" for ch in self.chars), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(lines)


def build_default_vocab() -> Vocabulary:
    """94 printable ASCII characters (33..126) plus the two control tokens."""
    return Vocabulary(chr(c) for c in range(33, 127))


def one_hot(ids: Sequence[int], num_classes: int, margin: float = 10.0) -> np.ndarray:
    """Logits placing ``margin`` on each id; handy for decode tests."""
    out = np.zeros((len(ids), num_classes))
    out[np.arange(len(ids)), list(ids)] = margin
    return out
