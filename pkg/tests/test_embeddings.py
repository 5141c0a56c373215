"""Tests for vector-file parsing and embedding matrix assembly."""

import numpy as np
import pytest

from dialact.embeddings import (
    EmbeddingMatrix, build_matrix, load_vectors, save_vectors, OOV_RANGE,
)
from dialact.errors import DataError, ParseError
from dialact.vocab import Vocabulary, PAD_INDEX, UNK_INDEX


def make_vocab(tokens):
    entries = ["<PAD>", "<UNK>"] + list(tokens)
    return Vocabulary(entries=tuple(entries),
                      index_of={t: i for i, t in enumerate(entries)},
                      size_cap=len(tokens))


def test_load_vectors_with_header(tmp_path):
    p = tmp_path / "v.vec"
    p.write_text("2 3\nhello 1.0 2.0 3.0\nworld -1.5 0.0 0.25\n")
    vecs = load_vectors(p)
    assert set(vecs) == {"hello", "world"}
    np.testing.assert_array_equal(vecs["hello"], [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(vecs["world"], [-1.5, 0.0, 0.25])


def test_load_vectors_without_header(tmp_path):
    p = tmp_path / "v.vec"
    p.write_text("hello 1 2\nworld 3 4\n")
    vecs = load_vectors(p)
    assert vecs["world"].tolist() == [3.0, 4.0]


def test_load_vectors_dimension_mismatch(tmp_path):
    p = tmp_path / "v.vec"
    p.write_text("a 1 2 3\nb 1 2\n")
    with pytest.raises(ParseError, match=":2"):
        load_vectors(p)


def test_load_vectors_non_numeric(tmp_path):
    p = tmp_path / "v.vec"
    p.write_text("a 1 2\nb x y\n")
    with pytest.raises(ParseError, match=":2"):
        load_vectors(p)


def test_load_vectors_empty_file(tmp_path):
    p = tmp_path / "v.vec"
    p.write_text("")
    with pytest.raises(DataError):
        load_vectors(p)


def test_build_matrix_copies_known_rows():
    vocab = make_vocab(["hello", "world"])
    vecs = {"hello": np.array([1.0, 2.0]), "world": np.array([3.0, 4.0])}
    emb = build_matrix(vocab, vecs, dim=2)
    np.testing.assert_array_equal(emb.matrix[2], [1.0, 2.0])
    np.testing.assert_array_equal(emb.matrix[3], [3.0, 4.0])


def test_build_matrix_pad_row_is_zero():
    vocab = make_vocab(["a"])
    emb = build_matrix(vocab, {}, dim=8, seed=3)
    assert np.all(emb.matrix[PAD_INDEX] == 0.0)


def test_build_matrix_oov_rows_in_range_and_nonzero():
    vocab = make_vocab([f"t{i}" for i in range(50)])
    emb = build_matrix(vocab, {}, dim=16, seed=1)
    oov = emb.matrix[UNK_INDEX:]
    assert np.all(np.abs(oov) <= OOV_RANGE)
    assert np.all(np.any(oov != 0.0, axis=1))


def test_build_matrix_deterministic_per_seed():
    vocab = make_vocab(["a", "b", "c"])
    m1 = build_matrix(vocab, {}, dim=4, seed=7).matrix
    m2 = build_matrix(vocab, {}, dim=4, seed=7).matrix
    m3 = build_matrix(vocab, {}, dim=4, seed=8).matrix
    np.testing.assert_array_equal(m1, m2)
    assert not np.array_equal(m1, m3)


def test_build_matrix_rejects_wrong_dimension():
    vocab = make_vocab(["a"])
    with pytest.raises(DataError):
        build_matrix(vocab, {"a": np.array([1.0, 2.0, 3.0])}, dim=2)


def test_save_load_round_trip_preserves_values(tmp_path):
    rng = np.random.default_rng(0)
    vecs = {f"tok{i}": rng.standard_normal(5) for i in range(10)}
    p = tmp_path / "out.vec"
    save_vectors(vecs, p)
    back = load_vectors(p)
    assert set(back) == set(vecs)
    for t in vecs:
        np.testing.assert_array_equal(back[t], vecs[t])


def test_copy_is_independent():
    emb = EmbeddingMatrix(np.ones((3, 2)), dim=2, trainable=False)
    dup = emb.copy()
    dup.matrix[0, 0] = 9.0
    assert emb.matrix[0, 0] == 1.0
