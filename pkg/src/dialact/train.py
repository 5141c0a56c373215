"""Training loop (Adam), teacher-forced sampling, and the multi-seed
averaging protocol."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import Corpus, window
from .errors import DataError, NumericError
from .embeddings import EmbeddingMatrix
from .metrics import accuracy, macro_f1
from .models import (ModelConfig, DAModel, build_model, predict_dialogue,
                     one_hot)
from .vocab import Vocabulary, encode


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 20
    seeds: tuple[int, ...] = tuple(range(10))
    holdout: float = 0.0   # fraction of samples logged as validation only

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not self.seeds:
            raise ValueError("need at least one seed")


@dataclass
class EpochLog:
    epoch: int
    loss: float
    train_accuracy: float


@dataclass
class TrainResult:
    model: DAModel
    tag_set: tuple[str, ...]
    log: list[EpochLog]


class Adam:
    """Adam with bias correction; touches only trainable parameters."""

    def __init__(self, params, config: TrainConfig):
        self.params = list(params)
        self.cfg = config
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]
        self.t = 0

    def step(self):
        self.t += 1
        c = self.cfg
        bc1 = 1.0 - c.beta1 ** self.t
        bc2 = 1.0 - c.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            m *= c.beta1
            m += (1.0 - c.beta1) * p.grad
            v *= c.beta2
            v += (1.0 - c.beta2) * p.grad ** 2
            p.value -= c.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + c.eps)


def pooled_tag_set(corpora: list[Corpus]) -> tuple[str, ...]:
    """Sorted union of the corpora's tag sets."""
    tags: set[str] = set()
    for c in corpora:
        tags.update(c.tag_set)
    return tuple(sorted(tags))


def encode_dialogue(dialogue, vocab: Vocabulary, w: int,
                    tag_index: dict[str, int]):
    """Window + encode every utterance; returns (ids list, tag-index list)."""
    ids, tags = [], []
    for u in dialogue.utterances:
        ids.append(np.array(encode(vocab, window(u.tokens, w)),
                            dtype=np.int64))
        if u.da_tag not in tag_index:
            raise DataError(
                f"tag {u.da_tag!r} missing from the pooled tag set")
        tags.append(tag_index[u.da_tag])
    return ids, tags


def build_samples(corpora, vocab: Vocabulary, w: int, tag_set,
                  use_history: bool):
    """Teacher-forced training samples (ids, history one-hot, gold tag).

    The history vector of each utterance is the one-hot of the *gold*
    previous tag (zero vector at dialogue starts), which makes every
    sample self-contained and utterance-level shuffling sound.
    """
    k = len(tag_set)
    tag_index = {t: i for i, t in enumerate(tag_set)}
    xs, hs, ys = [], [], []
    for corpus in corpora:
        for d in corpus.dialogues:
            ids, tags = encode_dialogue(d, vocab, w, tag_index)
            prev = None
            for u_ids, tag in zip(ids, tags):
                xs.append(u_ids)
                if use_history:
                    hs.append(one_hot(prev, k))
                ys.append(tag)
                prev = tag
    x = np.stack(xs)
    h = np.stack(hs) if use_history else None
    y = np.array(ys, dtype=np.int64)
    return x, h, y


def train(model_config: ModelConfig, corpora: list[Corpus],
          vocab: Vocabulary, emb: EmbeddingMatrix, config: TrainConfig,
          seed: int | None = None,
          tag_set: tuple[str, ...] | None = None) -> TrainResult:
    """Train one model on the pooled corpora.

    When several corpora are given their tag sets are pooled, so a single
    multi-lingual classifier covers every language's labels.
    """
    if tag_set is None:
        tag_set = pooled_tag_set(corpora)
    for c in corpora:
        missing = set(c.tag_set) - set(tag_set)
        if missing:
            raise DataError(f"tags {sorted(missing)} missing from the "
                            "pooled tag set")
    if model_config.tag_count != len(tag_set):
        raise DataError(
            f"config tag_count {model_config.tag_count} != "
            f"|pooled tag set| {len(tag_set)}")
    if seed is not None:
        model_config = replace(model_config, seed=seed)
    model = build_model(model_config, emb)
    x, h, y = build_samples(corpora, vocab, model_config.window, tag_set,
                            model_config.use_history)
    n = len(y)
    rng = np.random.default_rng(model_config.seed)
    n_val = int(round(config.holdout * n))
    if n_val:
        perm = rng.permutation(n)
        val_idx, trn_idx = perm[:n_val], perm[n_val:]
    else:
        trn_idx, val_idx = np.arange(n), None

    opt = Adam(model.parameters(), config)
    log: list[EpochLog] = []
    step = 0
    for epoch in range(config.epochs):
        order = trn_idx[rng.permutation(len(trn_idx))]
        total_loss = 0.0
        correct = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            model.zero_grads()
            try:
                loss, probs, dlogits = model.loss(
                    x[batch], None if h is None else h[batch], y[batch])
            except NumericError as exc:
                raise NumericError(f"step {step}: {exc}") from exc
            model.backward(dlogits)
            opt.step()
            total_loss += loss * len(batch)
            correct += int((probs.argmax(axis=1) == y[batch]).sum())
            step += 1
        log.append(EpochLog(epoch=epoch,
                            loss=total_loss / len(order),
                            train_accuracy=correct / len(order)))
    return TrainResult(model=model, tag_set=tuple(tag_set), log=log)


def evaluate_model(model: DAModel, test_corpus: Corpus, vocab: Vocabulary,
                   tag_set, test_emb: EmbeddingMatrix | None = None):
    """Greedy-decode every test dialogue and score against gold tags.

    `test_emb` optionally swaps in a different (e.g. CCA-projected) static
    embedding matrix, with `vocab` being the matching test-side
    vocabulary.
    """
    if test_emb is not None:
        model.set_embedding_matrix(test_emb)
    tag_index = {t: i for i, t in enumerate(tag_set)}
    gold: list[str] = []
    pred: list[str] = []
    for d in test_corpus.dialogues:
        ids = [np.array(encode(vocab, window(u.tokens, model.config.window)),
                        dtype=np.int64) for u in d.utterances]
        preds = predict_dialogue(model, ids)
        pred.extend(tag_set[i] for i in preds)
        gold.extend(u.da_tag for u in d.utterances)
    eval_tags = tuple(sorted(set(tag_set) | set(gold)))
    return (accuracy(gold, pred), macro_f1(gold, pred, eval_tags),
            gold, pred)


@dataclass
class ProtocolResult:
    per_seed: list[tuple[int, float, float]]   # (seed, accuracy, macro_f1)
    mean_accuracy: float
    std_accuracy: float
    mean_f1: float
    std_f1: float


def run_protocol(model_config: ModelConfig, train_corpora: list[Corpus],
                 test_corpus: Corpus, vocab: Vocabulary,
                 emb: EmbeddingMatrix, config: TrainConfig,
                 test_vocab: Vocabulary | None = None,
                 test_emb: EmbeddingMatrix | None = None) -> ProtocolResult:
    """Train one model per seed and average the test metrics.

    The optional test-side vocabulary/matrix pair supports the
    cross-lingual flow (pivot-trained model, projected test embeddings).
    """
    tag_set = pooled_tag_set(train_corpora)

    def run_seed(seed: int):
        result = train(model_config, train_corpora, vocab, emb, config,
                       seed=seed, tag_set=tag_set)
        acc, f1, _, _ = evaluate_model(
            result.model, test_corpus,
            vocab if test_vocab is None else test_vocab,
            tag_set, test_emb=test_emb)
        return seed, acc, f1

    workers = max(1, int(os.environ.get("DACT_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(run_seed, config.seeds))
    else:
        per_seed = [run_seed(s) for s in config.seeds]
    accs = np.array([a for _, a, _ in per_seed])
    f1s = np.array([f for _, _, f in per_seed])
    return ProtocolResult(per_seed=per_seed,
                          mean_accuracy=float(accs.mean()),
                          std_accuracy=float(accs.std()),
                          mean_f1=float(f1s.mean()),
                          std_f1=float(f1s.std()))


def write_training_log(log: list[EpochLog], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "train_accuracy"])
        for entry in log:
            writer.writerow([entry.epoch, repr(entry.loss),
                             repr(entry.train_accuracy)])


def write_protocol_csv(result: ProtocolResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "accuracy", "macro_f1"])
        for seed, acc, f1 in result.per_seed:
            writer.writerow([seed, repr(acc), repr(f1)])
        writer.writerow(["mean", repr(result.mean_accuracy),
                         repr(result.mean_f1)])
        writer.writerow(["std", repr(result.std_accuracy),
                         repr(result.std_f1)])
