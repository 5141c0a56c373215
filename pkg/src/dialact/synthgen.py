"""Deterministic synthetic bilingual DA corpora.

Utterances are emitted from per-tag templates; tag sequences follow a
Markov chain. Language L2 mirrors L1 through a token-level bijection (the
lexicon), and L2's embedding space is L1's under a fixed random orthogonal
map plus optional noise, so CCA alignment is exactly recoverable in the
noiseless case. Tag pairs in the ambiguity set share their template list,
so only dialogue history can tell them apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .align import BilingualLexicon
from .corpus import Corpus, Dialogue, Utterance, serialize_corpus
from .embeddings import save_vectors
from .errors import DataError
from .nn import orthogonal


@dataclass
class SynthSpec:
    tag_count: int
    templates_per_tag: int = 3
    vocab_size: int = 60                 # tokens per language
    transition: np.ndarray | None = None  # K x K row-stochastic (uniform if None)
    ambiguity: tuple[tuple[int, int], ...] = ()
    train_utterances: int = 500
    test_utterances: int = 200
    dialogue_length: int = 10
    min_template_len: int = 3
    max_template_len: int = 10
    emb_dim: int = 16
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        k = self.tag_count
        if k < 2:
            raise DataError("tag_count must be >= 2")
        if self.vocab_size < k:
            raise DataError("vocab_size must be >= tag_count")
        if self.transition is None:
            self.transition = np.full((k, k), 1.0 / k)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        if self.transition.shape != (k, k):
            raise DataError(f"transition matrix must be {k}x{k}")
        if not np.allclose(self.transition.sum(axis=1), 1.0):
            raise DataError("transition matrix rows must sum to 1")
        for a, b in self.ambiguity:
            if not (0 <= a < k and 0 <= b < k):
                raise DataError(f"ambiguity pair ({a},{b}) out of range")


@dataclass
class SynthData:
    corpus_l1_train: Corpus
    corpus_l1_test: Corpus
    corpus_l2_train: Corpus
    corpus_l2_test: Corpus
    vectors_l1: dict[str, np.ndarray]
    vectors_l2: dict[str, np.ndarray]
    lexicon: BilingualLexicon            # pairs are (L1 token, L2 token)
    ortho_map: np.ndarray                # ground-truth L1 -> L2 map

    def save(self, out_dir: str | Path) -> None:
        """Emit the TSV corpora, text-format vectors and the lexicon."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        serialize_corpus(self.corpus_l1_train, out / "l1_train.tsv")
        serialize_corpus(self.corpus_l1_test, out / "l1_test.tsv")
        serialize_corpus(self.corpus_l2_train, out / "l2_train.tsv")
        serialize_corpus(self.corpus_l2_test, out / "l2_test.tsv")
        save_vectors(self.vectors_l1, out / "l1.vec")
        save_vectors(self.vectors_l2, out / "l2.vec")
        with open(out / "lexicon.tsv", "w", encoding="utf-8") as fh:
            for s, p in self.lexicon.pairs:
                fh.write(f"{s}\t{p}\n")


def tag_name(i: int) -> str:
    return f"tag{i:02d}"


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix."""
    evals, evecs = np.linalg.eig(transition.T)
    idx = int(np.argmin(np.abs(evals - 1.0)))
    pi = np.real(evecs[:, idx])
    pi = np.abs(pi)
    return pi / pi.sum()


def _make_templates(spec: SynthSpec, tokens: list[str],
                    rng: np.random.Generator):
    """Per-tag templates drawn from disjoint token blocks; ambiguity pairs
    then share one list."""
    k = spec.tag_count
    block = spec.vocab_size // k
    templates: list[list[tuple[str, ...]]] = []
    for t in range(k):
        pool = tokens[t * block:(t + 1) * block]
        tag_templates = []
        for _ in range(spec.templates_per_tag):
            length = int(rng.integers(spec.min_template_len,
                                      spec.max_template_len + 1))
            tag_templates.append(tuple(
                pool[int(i)] for i in rng.integers(0, len(pool),
                                                   size=length)))
        templates.append(tag_templates)
    for a, b in spec.ambiguity:
        shared = templates[a]
        templates[b] = shared
    return templates


def _emit_corpus(spec: SynthSpec, templates, n_utterances: int,
                 language: str, split: str,
                 rng: np.random.Generator) -> Corpus:
    k = spec.tag_count
    dialogues = []
    produced = 0
    d_idx = 0
    while produced < n_utterances:
        length = min(spec.dialogue_length, n_utterances - produced)
        utterances = []
        tag = int(rng.integers(0, k))
        for _ in range(length):
            tpl = templates[tag][int(rng.integers(0, len(templates[tag])))]
            utterances.append(Utterance(tokens=tpl, da_tag=tag_name(tag),
                                        language=language))
            tag = int(rng.choice(k, p=spec.transition[tag]))
        dialogues.append(Dialogue(id=f"{language}_{split}_{d_idx:05d}",
                                  utterances=tuple(utterances)))
        produced += length
        d_idx += 1
    tags = sorted({u.da_tag for d in dialogues for u in d.utterances})
    return Corpus(dialogues=tuple(dialogues), tag_set=tuple(tags),
                  languages=frozenset({language}))


def _translate(corpus: Corpus, mapping: dict[str, str],
               language: str) -> Corpus:
    dialogues = tuple(
        Dialogue(id=language + "_" + d.id.split("_", 1)[1],
                 utterances=tuple(
                     Utterance(tokens=tuple(mapping[t] for t in u.tokens),
                               da_tag=u.da_tag, language=language)
                     for u in d.utterances))
        for d in corpus.dialogues)
    return Corpus(dialogues=dialogues, tag_set=corpus.tag_set,
                  languages=frozenset({language}))


def generate(spec: SynthSpec) -> SynthData:
    """Generate the bilingual corpora, embeddings and lexicon.

    L1 train/test are sampled from the template system; the L2 corpora are
    fresh samples from the same system with every token passed through the
    bijection, so the two languages share tag structure but not surface
    forms. Same seed, same bytes.
    """
    rng = np.random.default_rng(spec.seed)
    tokens_l1 = [f"w{i:04d}" for i in range(spec.vocab_size)]
    tokens_l2 = [f"v{i:04d}" for i in range(spec.vocab_size)]
    bijection = dict(zip(tokens_l1, tokens_l2))

    templates = _make_templates(spec, tokens_l1, rng)
    l1_train = _emit_corpus(spec, templates, spec.train_utterances,
                            "l1", "train", rng)
    l1_test = _emit_corpus(spec, templates, spec.test_utterances,
                           "l1", "test", rng)
    l2_train = _translate(
        _emit_corpus(spec, templates, spec.train_utterances, "l1", "xtrain",
                     rng), bijection, "l2")
    l2_test = _translate(
        _emit_corpus(spec, templates, spec.test_utterances, "l1", "xtest",
                     rng), bijection, "l2")

    vecs_l1 = {t: rng.standard_normal(spec.emb_dim) / np.sqrt(spec.emb_dim)
               for t in tokens_l1}
    q = orthogonal(rng, spec.emb_dim)
    vecs_l2 = {}
    for t1, t2 in bijection.items():
        noise = (spec.noise * rng.standard_normal(spec.emb_dim)
                 if spec.noise else 0.0)
        vecs_l2[t2] = vecs_l1[t1] @ q + noise

    lexicon = BilingualLexicon(pairs=tuple(bijection.items()))
    return SynthData(corpus_l1_train=l1_train, corpus_l1_test=l1_test,
                     corpus_l2_train=l2_train, corpus_l2_test=l2_test,
                     vectors_l1=vecs_l1, vectors_l2=vecs_l2,
                     lexicon=lexicon, ortho_map=q)
