"""Dialogue-act corpus ingest, statistics and fixed-length windowing.

The ingest format is a 5-field TSV, one utterance per line:

    dialogue_id <TAB> turn_index <TAB> language <TAB> da_tag <TAB> text

Text is whitespace-tokenized after lowercasing. Lines starting with '#'
and blank lines are ignored.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, DataError

PAD_TOKEN = "<PAD>"
UNK_TOKEN = "<UNK>"


@dataclass(frozen=True)
class Utterance:
    tokens: tuple[str, ...]
    da_tag: str
    language: str


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[Utterance, ...]


@dataclass(frozen=True)
class Corpus:
    dialogues: tuple[Dialogue, ...]
    tag_set: tuple[str, ...]      # sorted lexicographically
    languages: frozenset[str]

    def utterances(self):
        for d in self.dialogues:
            yield from d.utterances


@dataclass(frozen=True)
class CorpusStats:
    dialogue_count: int
    da_count: int
    word_count: int
    tag_histogram: dict[str, int]


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase and split on whitespace."""
    return tuple(text.lower().split())


def parse_corpus(path: str | Path) -> Corpus:
    """Parse the 5-field TSV format into a Corpus.

    Dialogues are grouped by dialogue_id and utterances sorted by
    turn_index. The tag set and language set are derived from the data.
    """
    path = Path(path)
    by_dialogue: dict[str, dict[int, Utterance]] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ParseError(
                    f"{path}:{lineno}: expected 5 tab-separated fields, "
                    f"got {len(fields)}")
            did, turn_s, lang, tag, text = fields
            try:
                turn = int(turn_s)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: turn_index {turn_s!r} is not an integer")
            tokens = tokenize(text)
            if not tokens:
                raise ParseError(f"{path}:{lineno}: empty utterance text")
            if not tag:
                raise ParseError(f"{path}:{lineno}: empty da_tag")
            turns = by_dialogue.setdefault(did, {})
            if not turns:
                order.append(did)
            if turn in turns:
                raise ParseError(
                    f"{path}:{lineno}: duplicate turn {turn} in dialogue {did!r}")
            turns[turn] = Utterance(tokens=tokens, da_tag=tag, language=lang)
    if not by_dialogue:
        raise DataError(f"{path}: no utterances found")
    dialogues = tuple(
        Dialogue(id=did,
                 utterances=tuple(turns[t] for t in sorted(turns)))
        for did, turns in ((d, by_dialogue[d]) for d in sorted(order)))
    tags = sorted({u.da_tag for d in dialogues for u in d.utterances})
    langs = frozenset(u.language for d in dialogues for u in d.utterances)
    return Corpus(dialogues=dialogues, tag_set=tuple(tags), languages=langs)


def serialize_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a Corpus back to the TSV ingest format."""
    with open(path, "w", encoding="utf-8") as fh:
        for d in corpus.dialogues:
            for turn, u in enumerate(d.utterances):
                fh.write(f"{d.id}\t{turn}\t{u.language}\t{u.da_tag}\t"
                         f"{' '.join(u.tokens)}\n")


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Dialogue, DA and word counts plus the per-tag histogram."""
    hist = Counter({t: 0 for t in corpus.tag_set})
    words = 0
    das = 0
    for u in corpus.utterances():
        hist[u.da_tag] += 1
        words += len(u.tokens)
        das += 1
    return CorpusStats(dialogue_count=len(corpus.dialogues),
                       da_count=das, word_count=words,
                       tag_histogram=dict(hist))


def window(tokens, w: int) -> tuple[str, ...]:
    """Truncate to the first w tokens or right-pad with PAD up to w."""
    if w < 1:
        raise ValueError("window length must be >= 1")
    tokens = tuple(tokens)
    if len(tokens) >= w:
        return tokens[:w]
    return tokens + (PAD_TOKEN,) * (w - len(tokens))
