"""Tests for the Adam optimizer, training loop, and seed protocol."""

import numpy as np
import pytest

from dialact.corpus import Corpus, Dialogue, Utterance
from dialact.embeddings import build_matrix
from dialact.errors import DataError
from dialact.models import ModelConfig
from dialact.nn import Parameter
from dialact.synthgen import SynthSpec, generate
from dialact.train import (
    Adam, TrainConfig, build_samples, evaluate_model, pooled_tag_set,
    run_protocol, train, write_protocol_csv, write_training_log,
)
from dialact.vocab import build_vocab

W, E = 5, 8


@pytest.fixture(scope="module")
def synth():
    spec = SynthSpec(tag_count=3, vocab_size=30, train_utterances=120,
                     test_utterances=40, dialogue_length=6, emb_dim=E,
                     seed=0)
    return generate(spec)


def setup_train(synth, trainable=False):
    corpus = synth.corpus_l1_train
    vocab = build_vocab(corpus, cap=100)
    emb = build_matrix(vocab, synth.vectors_l1, dim=E, trainable=trainable)
    return corpus, vocab, emb


def model_cfg(synth, arch="cnn1", use_history=False, mode="static"):
    return ModelConfig(architecture=arch,
                       tag_count=len(synth.corpus_l1_train.tag_set),
                       window=W, emb_dim=E, use_history=use_history,
                       embedding_mode=mode)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(seeds=())


def test_adam_first_step_size_is_lr():
    """With bias correction the first update has magnitude ~lr per entry."""
    p = Parameter(np.zeros(4), "p")
    p.grad[...] = np.array([1.0, -2.0, 0.5, 10.0])
    opt = Adam([p], TrainConfig(learning_rate=1e-3))
    opt.step()
    np.testing.assert_allclose(np.abs(p.value), 1e-3, rtol=1e-6)
    np.testing.assert_array_equal(np.sign(p.value), [-1, 1, -1, -1])


def test_adam_converges_on_quadratic():
    p = Parameter(np.array([5.0, -3.0]), "p")
    opt = Adam([p], TrainConfig(learning_rate=0.1))
    for _ in range(500):
        p.grad = 2.0 * (p.value - np.array([1.0, 2.0]))
        opt.step()
    np.testing.assert_allclose(p.value, [1.0, 2.0], atol=1e-3)


def test_pooled_tag_set_sorted_union():
    c1 = Corpus(dialogues=(), tag_set=("b", "d"), languages=frozenset())
    c2 = Corpus(dialogues=(), tag_set=("a", "b"), languages=frozenset())
    assert pooled_tag_set([c1, c2]) == ("a", "b", "d")


def test_build_samples_teacher_forcing(synth):
    corpus, vocab, _ = setup_train(synth)
    tag_set = corpus.tag_set
    x, h, y = build_samples([corpus], vocab, W, tag_set, use_history=True)
    n = sum(len(d.utterances) for d in corpus.dialogues)
    assert x.shape == (n, W) and h.shape == (n, len(tag_set))
    assert y.shape == (n,)
    # First utterance of each dialogue has a zero history; later ones are
    # the one-hot of the gold previous tag.
    i = 0
    for d in corpus.dialogues:
        assert h[i].sum() == 0.0
        for t in range(1, len(d.utterances)):
            expected = np.zeros(len(tag_set))
            expected[y[i + t - 1]] = 1.0
            np.testing.assert_array_equal(h[i + t], expected)
        i += len(d.utterances)


def test_build_samples_no_history(synth):
    corpus, vocab, _ = setup_train(synth)
    x, h, y = build_samples([corpus], vocab, W, corpus.tag_set,
                            use_history=False)
    assert h is None
    assert x.dtype == np.int64


def test_train_reduces_loss(synth):
    corpus, vocab, emb = setup_train(synth)
    result = train(model_cfg(synth), [corpus], vocab, emb,
                   TrainConfig(epochs=5, seeds=(0,)), seed=0)
    assert result.log[-1].loss < result.log[0].loss
    assert result.log[-1].train_accuracy > 0.5
    assert len(result.log) == 5


def test_train_initial_loss_near_log_k(synth):
    corpus, vocab, emb = setup_train(synth)
    result = train(model_cfg(synth), [corpus], vocab, emb,
                   TrainConfig(epochs=1, seeds=(0,)), seed=0)
    k = len(corpus.tag_set)
    # The first epoch's mean loss already includes updates, so the bound
    # is loose but still anchored at ln K.
    assert result.log[0].loss < np.log(k) + 0.5


def test_train_same_seed_bit_identical(synth):
    corpus, vocab, emb = setup_train(synth)
    cfg = TrainConfig(epochs=2, seeds=(3,))
    r1 = train(model_cfg(synth), [corpus], vocab, emb, cfg, seed=3)
    r2 = train(model_cfg(synth), [corpus], vocab, emb, cfg, seed=3)
    for pa, pb in zip(r1.model.parameters(), r2.model.parameters()):
        assert pa.value.tobytes() == pb.value.tobytes(), pa.name
    assert r1.log == r2.log


def test_train_different_seeds_differ(synth):
    corpus, vocab, emb = setup_train(synth)
    cfg = TrainConfig(epochs=1, seeds=(0,))
    r1 = train(model_cfg(synth), [corpus], vocab, emb, cfg, seed=0)
    r2 = train(model_cfg(synth), [corpus], vocab, emb, cfg, seed=1)
    assert any(pa.value.tobytes() != pb.value.tobytes()
               for pa, pb in zip(r1.model.parameters(),
                                 r2.model.parameters()))


def test_static_embedding_unchanged_by_training(synth):
    corpus, vocab, emb = setup_train(synth)
    before = emb.matrix.copy()
    result = train(model_cfg(synth), [corpus], vocab, emb,
                   TrainConfig(epochs=2, seeds=(0,)), seed=0)
    np.testing.assert_array_equal(result.model.embedding_matrix, before)


def test_trainable_embedding_changes(synth):
    corpus, vocab, _ = setup_train(synth)
    emb = build_matrix(vocab, synth.vectors_l1, dim=E, trainable=True)
    before = emb.matrix.copy()
    result = train(model_cfg(synth, mode="trainable"), [corpus], vocab, emb,
                   TrainConfig(epochs=2, seeds=(0,)), seed=0)
    after = result.model.embedding_matrix
    assert not np.array_equal(after, before)
    np.testing.assert_array_equal(after[0], np.zeros(E))  # PAD stays zero


def test_train_tag_count_mismatch(synth):
    corpus, vocab, emb = setup_train(synth)
    bad = ModelConfig(architecture="cnn1", tag_count=7, window=W, emb_dim=E)
    with pytest.raises(DataError):
        train(bad, [corpus], vocab, emb, TrainConfig(epochs=1, seeds=(0,)))


def test_train_pools_tags_across_corpora(synth):
    corpus, vocab, emb = setup_train(synth)
    extra = Corpus(
        dialogues=(Dialogue(id="x_0", utterances=(
            Utterance(tokens=("w0001", "w0002"), da_tag="zz_extra",
                      language="l9"),)),),
        tag_set=("zz_extra",), languages=frozenset({"l9"}))
    cfg = ModelConfig(architecture="cnn1",
                      tag_count=len(corpus.tag_set) + 1,
                      window=W, emb_dim=E)
    result = train(cfg, [corpus, extra], vocab, emb,
                   TrainConfig(epochs=1, seeds=(0,)))
    assert "zz_extra" in result.tag_set


def test_evaluate_model_returns_sane_metrics(synth):
    corpus, vocab, emb = setup_train(synth)
    result = train(model_cfg(synth), [corpus], vocab, emb,
                   TrainConfig(epochs=5, seeds=(0,)), seed=0)
    acc, f1, gold, pred = evaluate_model(result.model, synth.corpus_l1_test,
                                         vocab, result.tag_set)
    n = sum(len(d.utterances) for d in synth.corpus_l1_test.dialogues)
    assert len(gold) == len(pred) == n
    assert 0.0 <= f1 <= 1.0
    assert acc > 1.0 / len(result.tag_set)  # beats chance after training
    assert set(pred) <= set(result.tag_set)


def test_evaluate_with_swapped_test_embedding(synth):
    """Cross-lingual evaluation path: a different vocab/matrix pair on the
    test side still produces predictions over the training tag set."""
    corpus, vocab, emb = setup_train(synth)
    result = train(model_cfg(synth), [corpus], vocab, emb,
                   TrainConfig(epochs=3, seeds=(0,)), seed=0)
    test_vocab = build_vocab(synth.corpus_l2_test, cap=100)
    test_emb = build_matrix(test_vocab, synth.vectors_l2, dim=E)
    acc, f1, gold, pred = evaluate_model(result.model, synth.corpus_l2_test,
                                         test_vocab, result.tag_set,
                                         test_emb=test_emb)
    assert result.model.embedding_matrix.shape[0] == len(test_vocab)
    assert 0.0 <= acc <= 1.0


def test_run_protocol_statistics(synth):
    corpus, vocab, emb = setup_train(synth)
    cfg = TrainConfig(epochs=2, seeds=(0, 1, 2))
    res = run_protocol(model_cfg(synth), [corpus], synth.corpus_l1_test,
                       vocab, emb, cfg)
    assert len(res.per_seed) == 3
    accs = [a for _, a, _ in res.per_seed]
    assert res.mean_accuracy == pytest.approx(np.mean(accs))
    assert res.std_accuracy == pytest.approx(np.std(accs))
    # Repeating a single seed gives zero spread.
    res1 = run_protocol(model_cfg(synth), [corpus], synth.corpus_l1_test,
                        vocab, emb, TrainConfig(epochs=2, seeds=(0,)))
    assert res1.std_accuracy == 0.0


def test_run_protocol_threaded_matches_serial(synth, monkeypatch):
    corpus, vocab, emb = setup_train(synth)
    cfg = TrainConfig(epochs=1, seeds=(0, 1))
    serial = run_protocol(model_cfg(synth), [corpus], synth.corpus_l1_test,
                          vocab, emb, cfg)
    monkeypatch.setenv("DACT_THREADS", "2")
    threaded = run_protocol(model_cfg(synth), [corpus],
                            synth.corpus_l1_test, vocab, emb, cfg)
    assert serial.per_seed == threaded.per_seed


def test_write_logs(tmp_path, synth):
    corpus, vocab, emb = setup_train(synth)
    cfg = TrainConfig(epochs=2, seeds=(0, 1))
    result = train(model_cfg(synth), [corpus], vocab, emb, cfg, seed=0)
    write_training_log(result.log, tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text().strip().splitlines()
    assert lines[0] == "epoch,loss,train_accuracy"
    assert len(lines) == 3
    res = run_protocol(model_cfg(synth), [corpus], synth.corpus_l1_test,
                       vocab, emb, cfg)
    write_protocol_csv(res, tmp_path / "proto.csv")
    rows = (tmp_path / "proto.csv").read_text().strip().splitlines()
    assert rows[0] == "seed,accuracy,macro_f1"
    assert rows[-2].startswith("mean,") and rows[-1].startswith("std,")
