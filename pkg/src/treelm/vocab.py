"""Word-to-id vocabulary with signature-based unknown-word classes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

EOS = "</s>"

# Suffixes checked longest-first; each owns one unk class.
UNK_SUFFIXES = ("ing", "ion", "ity", "est", "ed", "er", "ly", "al", "s", "y")
UNK_CLASSES = (
    "<unk>",
    "<unk-num>",
    "<unk-cap>",
    "<unk-dash>",
) + tuple(f"<unk-{s}>" for s in UNK_SUFFIXES)


def unk_signature(word: str, position: int) -> str:
    """Deterministic unk class for an out-of-vocabulary token.

    Sentence-initial capitalization is uninformative, so initial capitalized
    words fall through to the signature of their lowercased form.
    """
    if any(ch.isdigit() for ch in word):
        return "<unk-num>"
    if word[:1].isupper():
        if position > 0:
            return "<unk-cap>"
        word = word.lower()
    if "-" in word:
        return "<unk-dash>"
    for suffix in UNK_SUFFIXES:
        if len(word) > len(suffix) and word.endswith(suffix):
            return f"<unk-{suffix}>"
    return "<unk>"


@dataclass(frozen=True)
class Vocabulary:
    """Dense ids: 0 = EOS, then the fixed unk classes, then known words."""

    words: tuple[str, ...]
    min_count: int

    def __post_init__(self):
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.words)})

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def eos_id(self) -> int:
        return 0

    def id_of(self, word: str) -> int:
        """Exact lookup; raises KeyError for unknown words."""
        return self._index[word]

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def word_of(self, idx: int) -> str:
        return self.words[idx]

    def lookup(self, word: str, position: int = 0) -> int:
        """Map any raw token to exactly one id, falling back to an unk class."""
        idx = self._index.get(word)
        if idx is not None:
            return idx
        return self._index[unk_signature(word, position)]

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.lookup(tok, pos) for pos, tok in enumerate(tokens)]

    def to_dict(self) -> dict:
        return {"words": list(self.words), "min_count": self.min_count}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(tuple(data["words"]), int(data["min_count"]))


def build_vocab(sentences: list[list[str]], min_count: int = 1) -> Vocabulary:
    """Count tokens and keep those at or above min_count, alphabetically ordered."""
    counts = Counter(tok for sent in sentences for tok in sent)
    kept = sorted(w for w, c in counts.items() if c >= min_count and w != EOS and w not in UNK_CLASSES)
    words = (EOS,) + UNK_CLASSES + tuple(kept)
    return Vocabulary(words, min_count)


def unkify(word: str, position: int, vocab: Vocabulary) -> int:
    return vocab.lookup(word, position)
