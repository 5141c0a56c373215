"""Pretrained word vector loading and the |V| x EMB embedding matrix.

Vector files use the word2vec text format: an optional `count dim` header
line followed by `token v1 ... v_dim` lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, DataError
from .vocab import Vocabulary, PAD_INDEX

DEFAULT_DIM = 300
OOV_RANGE = 0.25  # uniform init range for tokens without a pretrained vector


@dataclass
class EmbeddingMatrix:
    matrix: np.ndarray        # |V| x dim, float64
    dim: int
    trainable: bool

    def copy(self) -> "EmbeddingMatrix":
        return EmbeddingMatrix(self.matrix.copy(), self.dim, self.trainable)


def load_vectors(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a text-format vector file into a token -> vector map."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            token, comps = parts[0], parts[1:]
            if dim is None:
                dim = len(comps)
                if dim == 0:
                    raise ParseError(f"{path}:{lineno}: no vector components")
            if len(comps) != dim:
                raise ParseError(
                    f"{path}:{lineno}: expected {dim} components, "
                    f"got {len(comps)}")
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric component")
            vectors[token] = vec
    if not vectors:
        raise DataError(f"{path}: no vectors found")
    return vectors


def build_matrix(vocab: Vocabulary, vectors: dict[str, np.ndarray],
                 dim: int = DEFAULT_DIM, trainable: bool = False,
                 seed: int = 0) -> EmbeddingMatrix:
    """Assemble the embedding matrix for a vocabulary.

    In-vocabulary rows are copied from `vectors`; tokens without a vector
    (including UNK) are initialized uniformly in [-0.25, 0.25] from the
    seeded generator. The PAD row is zero and stays zero during training.
    """
    rng = np.random.default_rng(seed)
    mat = np.zeros((len(vocab), dim), dtype=np.float64)
    for i, token in enumerate(vocab.entries):
        if i == PAD_INDEX:
            continue
        vec = vectors.get(token)
        if vec is not None:
            if len(vec) != dim:
                raise DataError(
                    f"vector for {token!r} has dimension {len(vec)}, "
                    f"expected {dim}")
            mat[i] = vec
        else:
            mat[i] = rng.uniform(-OOV_RANGE, OOV_RANGE, size=dim)
    return EmbeddingMatrix(matrix=mat, dim=dim, trainable=trainable)


def save_vectors(vectors: dict[str, np.ndarray], path: str | Path,
                 header: bool = True) -> None:
    """Write a token -> vector map in the text format."""
    items = list(vectors.items())
    with open(path, "w", encoding="utf-8") as fh:
        if header and items:
            fh.write(f"{len(items)} {len(items[0][1])}\n")
        for token, vec in items:
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec)
                     + "\n")
