"""Tests for the bilingual lexicon and CCA alignment.

The linear-recovery and invariance tests act as oracles: a correct CCA
projection must recover an exact linear relationship up to numerical
noise, must be invariant to invertible affine maps of the inputs, and
must be (near-)symmetric under swapping the two languages.
"""

import numpy as np
import pytest

from dialact.align import (
    BilingualLexicon, fit_cca, lexicon_matrices, load_cca, load_lexicon,
    project, project_corpus, save_cca,
)
from dialact.embeddings import EmbeddingMatrix
from dialact.errors import DataError


def paired_linear(n=400, dim=12, noise=0.0, seed=0):
    """Paired samples with y = x @ A + b (+ optional noise)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, dim))
    a = rng.standard_normal((dim, dim)) + 3.0 * np.eye(dim)
    b = rng.standard_normal(dim)
    y = x @ a + b
    if noise:
        y = y + noise * rng.standard_normal(y.shape)
    return x, y


def test_load_lexicon_and_swap(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("# comment\nhallo\thello\nwelt\tworld\n\n")
    lex = load_lexicon(p)
    assert lex.pairs == (("hallo", "hello"), ("welt", "world"))
    assert lex.swapped().pairs == (("hello", "hallo"), ("world", "welt"))


def test_load_lexicon_bad_field_count(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("a\tb\tc\n")
    with pytest.raises(DataError, match=":1"):
        load_lexicon(p)


def test_empty_lexicon_rejected():
    with pytest.raises(DataError):
        BilingualLexicon(pairs=())


def test_lexicon_matrices_drops_missing_pairs():
    lex = BilingualLexicon(pairs=(("a", "x"), ("b", "y"), ("c", "z")))
    src = {"a": np.ones(2), "b": np.zeros(2)}
    piv = {"x": np.ones(2), "y": np.full(2, 2.0), "z": np.ones(2)}
    xs, ys = lexicon_matrices(lex, src, piv)
    assert xs.shape == (2, 2) and ys.shape == (2, 2)


def test_lexicon_matrices_too_few_pairs():
    lex = BilingualLexicon(pairs=(("a", "x"), ("b", "y")))
    with pytest.raises(DataError):
        lexicon_matrices(lex, {"a": np.ones(2)}, {"x": np.ones(2)})


def test_cca_correlations_near_one_for_linear_pair():
    x, y = paired_linear()
    model = fit_cca(x, y)
    assert model.correlations.min() > 1.0 - 1e-6
    # Descending order.
    assert np.all(np.diff(model.correlations) <= 1e-12)


def test_cca_projection_recovers_linear_map():
    x, y = paired_linear(seed=1)
    model = fit_cca(x, y)
    proj = (x - model.mean_src) @ model.transform + model.mean_piv
    rel = np.linalg.norm(proj - y) / np.linalg.norm(y)
    assert rel < 1e-6


def test_cca_affine_invariance_of_correlations():
    rng = np.random.default_rng(2)
    x, y = paired_linear(noise=0.3, seed=2)
    m = rng.standard_normal((x.shape[1], x.shape[1])) + 2 * np.eye(x.shape[1])
    c1 = fit_cca(x, y).correlations
    c2 = fit_cca(x @ m + 1.5, y).correlations
    assert np.max(np.abs(c1 - c2)) < 1e-5


def test_cca_swap_symmetry():
    x, y = paired_linear(noise=0.2, seed=3)
    c_fwd = fit_cca(x, y).correlations
    c_bwd = fit_cca(y, x).correlations
    assert np.max(np.abs(c_fwd - c_bwd)) < 1e-8


def test_cca_independent_noise_has_low_correlation():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((2000, 8))
    y = rng.standard_normal((2000, 8))
    model = fit_cca(x, y)
    assert model.correlations.max() < 0.5


def test_cca_input_validation():
    with pytest.raises(DataError):
        fit_cca(np.ones((3, 2)), np.ones((4, 2)))
    with pytest.raises(DataError):
        fit_cca(np.ones((1, 2)), np.ones((1, 2)))
    bad = np.ones((4, 2))
    bad[0, 0] = np.nan
    with pytest.raises(DataError):
        fit_cca(bad, np.ones((4, 2)))
    with pytest.raises(ValueError):
        fit_cca(np.eye(4), np.eye(4), ridge=0.0)


def test_project_single_vector_matches_batch():
    x, y = paired_linear(dim=6, seed=5)
    model = fit_cca(x, y)
    v = x[17]
    single = project(model, v)
    batch = (x - model.mean_src) @ model.transform + model.mean_piv
    np.testing.assert_allclose(single, batch[17], rtol=0, atol=1e-12)


def test_project_dimension_check():
    x, y = paired_linear(dim=4, seed=6)
    model = fit_cca(x, y)
    with pytest.raises(DataError):
        project(model, np.zeros(5))


def test_project_corpus_keeps_pad_zero_and_static():
    x, y = paired_linear(dim=4, seed=7)
    model = fit_cca(x, y)
    mat = np.random.default_rng(0).standard_normal((5, 4))
    mat[0] = 0.0
    emb = EmbeddingMatrix(mat, dim=4, trainable=True)
    out = project_corpus(model, emb)
    assert np.all(out.matrix[0] == 0.0)
    assert out.trainable is False
    np.testing.assert_allclose(out.matrix[2], project(model, mat[2]),
                               atol=1e-12)


def test_save_load_round_trip(tmp_path):
    x, y = paired_linear(dim=5, seed=8)
    model = fit_cca(x, y)
    path = tmp_path / "cca.npz"
    save_cca(model, path)
    back = load_cca(path)
    np.testing.assert_array_equal(back.transform, model.transform)
    np.testing.assert_array_equal(back.correlations, model.correlations)
    assert back.ridge == model.ridge


def test_fit_is_deterministic():
    x, y = paired_linear(noise=0.1, seed=9)
    m1 = fit_cca(x, y)
    m2 = fit_cca(x, y)
    np.testing.assert_array_equal(m1.transform, m2.transform)


def test_sign_canonicalization():
    x, y = paired_linear(dim=5, seed=10)
    model = fit_cca(x, y)
    for j in range(model.w_src.shape[1]):
        col = model.w_src[:, j]
        assert col[np.argmax(np.abs(col))] > 0
