"""Frequency-capped vocabularies and index encoding.

Index 0 is reserved for PAD and index 1 for UNK in every vocabulary.
The serialized form is one token per line (line number - 1 = index),
the first two lines being the literal reserved tokens.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, PAD_TOKEN, UNK_TOKEN
from .errors import DataError

PAD_INDEX = 0
UNK_INDEX = 1
RESERVED = (PAD_TOKEN, UNK_TOKEN)


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[str, ...]
    index_of: dict[str, int]
    size_cap: int

    def __len__(self) -> int:
        return len(self.entries)


def _from_tokens(tokens: tuple[str, ...], cap: int) -> Vocabulary:
    index_of = {t: i for i, t in enumerate(tokens)}
    return Vocabulary(entries=tokens, index_of=index_of, size_cap=cap)


def _counts(corpus: Corpus) -> Counter:
    counts: Counter = Counter()
    for u in corpus.utterances():
        counts.update(u.tokens)
    return counts


def _top(counts: Counter, cap: int) -> list[str]:
    # Most frequent first; ties broken lexicographically.
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in ranked[:cap]]


def build_vocab(corpus: Corpus, cap: int) -> Vocabulary:
    """The cap most frequent corpus tokens, after the PAD/UNK slots."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    counts = _counts(corpus)
    if not counts:
        raise DataError("cannot build a vocabulary from an empty corpus")
    return _from_tokens(RESERVED + tuple(_top(counts, cap)), cap)


def build_union_vocab(corpora: list[Corpus], cap: int) -> Vocabulary:
    """Union of the per-corpus top-cap token sets.

    Identical surface forms across languages share one entry. Entries are
    ordered by total count over all corpora, ties lexicographic, so the
    result is deterministic.
    """
    if not corpora:
        raise DataError("no corpora given")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    union: set[str] = set()
    totals: Counter = Counter()
    for c in corpora:
        counts = _counts(c)
        if not counts:
            raise DataError("cannot build a vocabulary from an empty corpus")
        union.update(_top(counts, cap))
        totals.update(counts)
    ordered = sorted(union, key=lambda t: (-totals[t], t))
    return _from_tokens(RESERVED + tuple(ordered), cap)


def encode(vocab: Vocabulary, tokens) -> list[int]:
    """Map already-windowed tokens to indexes; unknown tokens map to UNK."""
    return [vocab.index_of.get(t, UNK_INDEX) for t in tokens]


def decode(vocab: Vocabulary, indexes) -> list[str]:
    return [vocab.entries[i] for i in indexes]


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in vocab.entries:
            fh.write(t + "\n")


def load_vocab(path: str | Path, size_cap: int | None = None) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        entries = tuple(line.rstrip("\n") for line in fh if line.rstrip("\n"))
    if entries[:2] != RESERVED:
        raise DataError(f"{path}: first two entries must be {RESERVED}")
    cap = size_cap if size_cap is not None else len(entries) - 2
    return _from_tokens(entries, cap)
