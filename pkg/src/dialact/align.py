"""CCA alignment between two embedding spaces.

Fits canonical directions on paired translation vectors and exposes a
single linear map T that carries source-language vectors into the pivot
language's original coordinates, so a pivot-trained classifier can be
reused without retraining.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .embeddings import EmbeddingMatrix
from .vocab import PAD_INDEX

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BilingualLexicon:
    """Translation pairs (source token, pivot token)."""
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.pairs:
            raise DataError("lexicon is empty")

    def swapped(self) -> "BilingualLexicon":
        """The same lexicon with source and pivot sides exchanged."""
        return BilingualLexicon(pairs=tuple((p, s) for s, p in self.pairs))


@dataclass
class CcaModel:
    mean_src: np.ndarray      # EMB
    mean_piv: np.ndarray      # EMB
    w_src: np.ndarray         # EMB x d
    w_piv: np.ndarray         # EMB x d
    correlations: np.ndarray  # d, descending, in [0, 1]
    transform: np.ndarray     # EMB x EMB, source -> pivot coordinates
    ridge: float


def load_lexicon(path: str | Path) -> BilingualLexicon:
    """Two tab-separated tokens per line: source, pivot."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise DataError(
                    f"{path}:{lineno}: expected 2 tab-separated tokens")
            pairs.append((fields[0], fields[1]))
    return BilingualLexicon(pairs=tuple(pairs))


def lexicon_matrices(lexicon: BilingualLexicon,
                     src_vectors: dict[str, np.ndarray],
                     piv_vectors: dict[str, np.ndarray]):
    """Stack the usable lexicon pairs into paired (X, Y) row matrices.

    Pairs with a missing vector on either side are dropped with a logged
    count.
    """
    xs, ys = [], []
    dropped = 0
    for s, p in lexicon.pairs:
        sv, pv = src_vectors.get(s), piv_vectors.get(p)
        if sv is None or pv is None:
            dropped += 1
            continue
        xs.append(sv)
        ys.append(pv)
    if dropped:
        log.info("dropped %d lexicon pairs with missing vectors", dropped)
    if len(xs) < 2:
        raise DataError("fewer than 2 usable lexicon pairs")
    return np.array(xs), np.array(ys)


def _inv_sqrt(cov: np.ndarray, ridge: float) -> np.ndarray:
    """Symmetric inverse square root of (cov + ridge * I)."""
    evals, evecs = np.linalg.eigh(cov + ridge * np.eye(cov.shape[0]))
    return evecs @ ((evecs / np.sqrt(evals)).T)


def default_ridge(x: np.ndarray, y: np.ndarray) -> float:
    sxx = np.cov(x, rowvar=False)
    syy = np.cov(y, rowvar=False)
    dim = x.shape[1]
    return 1e-8 * (np.trace(sxx) + np.trace(syy)) / (2 * dim)


def fit_cca(x: np.ndarray, y: np.ndarray, ridge: float | None = None,
            d: int | None = None) -> CcaModel:
    """Fit CCA on paired rows of x (source) and y (pivot).

    Whitens both sample covariances with a ridge, takes the SVD of the
    whitened cross-covariance, and derives the source-to-pivot map
    T = W_src @ pinv(W_piv). Direction signs are canonicalized so the
    largest-magnitude entry of each source direction is positive.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape != y.shape:
        raise DataError("x and y must be matrices of equal shape")
    n, dim = x.shape
    if n < 2:
        raise DataError("CCA needs at least 2 paired rows")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("non-finite values in CCA input")
    if ridge is None:
        ridge = default_ridge(x, y)
    if ridge <= 0:
        raise ValueError("ridge must be positive")

    mean_x = x.mean(axis=0)
    mean_y = y.mean(axis=0)
    xc = x - mean_x
    yc = y - mean_y
    sxx = xc.T @ xc / (n - 1)
    syy = yc.T @ yc / (n - 1)
    sxy = xc.T @ yc / (n - 1)

    isx = _inv_sqrt(sxx, ridge)
    isy = _inv_sqrt(syy, ridge)
    u, s, vt = np.linalg.svd(isx @ sxy @ isy)

    k = min(dim, n) if d is None else min(d, dim, n)
    w_src = isx @ u[:, :k]
    w_piv = isy @ vt[:k].T
    corr = np.clip(s[:k], 0.0, 1.0)

    # Sign canonicalization: per direction, largest |entry| of w_src > 0.
    for j in range(k):
        col = w_src[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            w_src[:, j] = -col
            w_piv[:, j] = -w_piv[:, j]

    transform = w_src @ np.linalg.pinv(w_piv)
    return CcaModel(mean_src=mean_x, mean_piv=mean_y,
                    w_src=w_src, w_piv=w_piv, correlations=corr,
                    transform=transform, ridge=float(ridge))


def project(model: CcaModel, v: np.ndarray) -> np.ndarray:
    """Map one source-space vector into pivot coordinates."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != model.mean_src.shape:
        raise DataError(
            f"vector has dimension {v.shape}, expected {model.mean_src.shape}")
    return (v - model.mean_src) @ model.transform + model.mean_piv


def project_corpus(model: CcaModel, emb: EmbeddingMatrix) -> EmbeddingMatrix:
    """Project every non-PAD row of an embedding matrix into pivot space.

    The PAD row bypasses projection and stays zero; the result is always
    static.
    """
    if emb.dim != model.mean_src.shape[0]:
        raise DataError(
            f"matrix dim {emb.dim} != model dim {model.mean_src.shape[0]}")
    out = (emb.matrix - model.mean_src) @ model.transform + model.mean_piv
    out[PAD_INDEX] = 0.0
    return EmbeddingMatrix(matrix=out, dim=emb.dim, trainable=False)


def save_cca(model: CcaModel, path: str | Path) -> None:
    np.savez(path, mean_src=model.mean_src, mean_piv=model.mean_piv,
             w_src=model.w_src, w_piv=model.w_piv,
             correlations=model.correlations, transform=model.transform,
             ridge=np.float64(model.ridge))


def load_cca(path: str | Path) -> CcaModel:
    with np.load(path) as data:
        return CcaModel(mean_src=data["mean_src"], mean_piv=data["mean_piv"],
                        w_src=data["w_src"], w_piv=data["w_piv"],
                        correlations=data["correlations"],
                        transform=data["transform"],
                        ridge=float(data["ridge"]))
