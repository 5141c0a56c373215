"""Classifier assembly: CNN1, CNN2 and Bi-LSTM with optional one-hot
previous-DA history conditioning, plus greedy dialogue decoding.

Architecture widths are fixed: CNN1 uses 40 (4, 1) kernels and a 256-unit
dense layer before the output; CNN2 uses 100 kernels each of sizes
(3, EMB), (4, EMB), (5, EMB), merged to 300 features, then a 256-unit
dense layer; the Bi-LSTM has 100 units per direction. When history is
enabled, the one-hot previous-tag vector (zeros for the first utterance)
is concatenated right before the softmax output layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import DataError
from .embeddings import EmbeddingMatrix
from .nn import (Dense, ReLU, Conv2D, MaxOverTime, Flatten, Embedding,
                 BiLSTM, softmax_xent_batch, gradcheck as _gradcheck)

CHECKPOINT_VERSION = 1

CNN1_KERNELS = 40
CNN1_KH = 4
CNN2_KERNELS = 100
CNN2_HEIGHTS = (3, 4, 5)
DENSE_UNITS = 256
LSTM_UNITS = 100

_MIN_WINDOW = {"cnn1": CNN1_KH, "cnn2": max(CNN2_HEIGHTS), "bilstm": 1}


@dataclass
class ModelConfig:
    architecture: str
    tag_count: int
    window: int = 15
    emb_dim: int = 300
    use_history: bool = False
    embedding_mode: str = "static"
    seed: int = 0

    def __post_init__(self):
        if self.architecture not in _MIN_WINDOW:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.window < _MIN_WINDOW[self.architecture]:
            raise ValueError(
                f"window {self.window} smaller than the largest "
                f"{self.architecture} kernel height")
        if self.tag_count < 2:
            raise ValueError("tag_count must be >= 2")
        if self.embedding_mode not in ("static", "trainable"):
            raise ValueError("embedding_mode must be static or trainable")


def one_hot(index: int | None, k: int) -> np.ndarray:
    """One-hot history vector; None encodes 'no previous DA' (all zeros)."""
    v = np.zeros(k)
    if index is not None:
        v[index] = 1.0
    return v


class DAModel:
    """A classifier graph over windowed token-index inputs."""

    def __init__(self, config: ModelConfig, emb: EmbeddingMatrix):
        if emb.dim != config.emb_dim:
            raise DataError(
                f"embedding dim {emb.dim} != config emb_dim {config.emb_dim}")
        self.config = config
        rng = np.random.default_rng(config.seed)
        trainable = config.embedding_mode == "trainable"
        self.embedding = Embedding(emb.matrix.copy(), trainable)
        k = config.tag_count
        hist = k if config.use_history else 0
        e = config.emb_dim

        if config.architecture == "cnn1":
            self.conv = Conv2D(CNN1_KH, 1, 1, CNN1_KERNELS, rng, "conv")
            self.relu1 = ReLU("relu1")
            self.pool = MaxOverTime()
            self.flat = Flatten()
            self.dense = Dense(e * CNN1_KERNELS, DENSE_UNITS, rng, "dense")
            self.relu2 = ReLU("relu2")
            self.out = Dense(DENSE_UNITS + hist, k, rng, "out")
            self._layers = [self.conv, self.relu1, self.pool, self.flat,
                            self.dense, self.relu2, self.out]
        elif config.architecture == "cnn2":
            self.convs = [Conv2D(kh, e, 1, CNN2_KERNELS, rng, f"conv{kh}")
                          for kh in CNN2_HEIGHTS]
            self.relus = [ReLU(f"relu{kh}") for kh in CNN2_HEIGHTS]
            self.pools = [MaxOverTime(f"pool{kh}") for kh in CNN2_HEIGHTS]
            self.flats = [Flatten(f"flat{kh}") for kh in CNN2_HEIGHTS]
            merged = CNN2_KERNELS * len(CNN2_HEIGHTS)
            self.dense = Dense(merged, DENSE_UNITS, rng, "dense")
            self.relu2 = ReLU("relu2")
            self.out = Dense(DENSE_UNITS + hist, k, rng, "out")
            self._layers = (self.convs + self.relus + self.pools + self.flats
                            + [self.dense, self.relu2, self.out])
        else:  # bilstm
            self.bilstm = BiLSTM(e, LSTM_UNITS, rng)
            self.out = Dense(2 * LSTM_UNITS + hist, k, rng, "out")
            self._layers = [self.bilstm, self.out]

    # -- forward / backward ------------------------------------------------

    def forward(self, ids: np.ndarray, history: np.ndarray | None = None
                ) -> np.ndarray:
        """Logits for a batch of windowed index sequences (N, W)."""
        ids = np.asarray(ids)
        if ids.ndim == 1:
            ids = ids[None, :]
        if self.config.use_history:
            if history is None:
                raise DataError("model requires a history vector")
            if history.ndim == 1:
                history = history[None, :]
        emb = self.embedding.forward(ids)                 # N, W, E
        arch = self.config.architecture
        if arch == "cnn1":
            x = self.conv.forward(emb[..., None])
            x = self.relu1.forward(x)
            x = self.pool.forward(x)
            feat = self.flat.forward(x)
            feat = self.relu2.forward(self.dense.forward(feat))
        elif arch == "cnn2":
            branches = []
            for conv, relu, pool, flat in zip(self.convs, self.relus,
                                              self.pools, self.flats):
                x = pool.forward(relu.forward(conv.forward(emb[..., None])))
                branches.append(flat.forward(x))
            self._branch_widths = [b.shape[1] for b in branches]
            feat = np.concatenate(branches, axis=1)
            feat = self.relu2.forward(self.dense.forward(feat))
        else:
            feat = self.bilstm.forward(emb)
        if self.config.use_history:
            self._feat_width = feat.shape[1]
            feat = np.concatenate([feat, history], axis=1)
        return self.out.forward(feat)

    def backward(self, dlogits: np.ndarray) -> None:
        d = self.out.backward(dlogits)
        if self.config.use_history:
            d = d[:, :self._feat_width]
        arch = self.config.architecture
        if arch == "cnn1":
            d = self.dense.backward(self.relu2.backward(d))
            d = self.flat.backward(d)
            d = self.pool.backward(d)
            d = self.relu1.backward(d)
            demb = self.conv.backward(d)[..., 0]
        elif arch == "cnn2":
            d = self.dense.backward(self.relu2.backward(d))
            demb = None
            offset = 0
            for conv, relu, pool, flat, width in zip(
                    self.convs, self.relus, self.pools, self.flats,
                    self._branch_widths):
                db = flat.backward(d[:, offset:offset + width])
                offset += width
                db = conv.backward(relu.backward(pool.backward(db)))[..., 0]
                demb = db if demb is None else demb + db
        else:
            demb = self.bilstm.backward(d)
        self.embedding.backward(demb)

    def loss(self, ids, history, targets):
        """Mean cross-entropy over a batch; returns (loss, probs, dlogits)."""
        logits = self.forward(ids, history)
        return softmax_xent_batch(logits, np.asarray(targets))

    # -- parameters ---------------------------------------------------------

    def layers(self):
        layers = list(self._layers)
        if self.embedding.trainable:
            layers.insert(0, self.embedding)
        return layers

    def parameters(self):
        return [p for layer in self.layers() for p in layer.params()]

    def zero_grads(self):
        for p in self.parameters():
            p.zero_grad()

    def param_count(self) -> int:
        return sum(p.value.size for p in self.parameters())

    @property
    def embedding_matrix(self) -> np.ndarray:
        return self.embedding.weight.value

    def set_embedding_matrix(self, emb: EmbeddingMatrix) -> None:
        """Swap in another (e.g. CCA-projected) matrix for inference.

        Only allowed in static mode; the row count may differ (different
        source vocabulary) but the dimension must match.
        """
        if self.embedding.trainable:
            raise DataError("cannot swap the matrix of a trainable embedding")
        if emb.dim != self.config.emb_dim:
            raise DataError("embedding dimension mismatch")
        self.embedding.weight.value = emb.matrix.astype(np.float64)

    # -- gradient check ------------------------------------------------------

    def gradcheck(self, ids, history, targets, per_layer: int = 200,
                  h: float = 1e-5, seed: int = 0) -> float:
        targets = np.asarray(targets)

        def loss_fn():
            return softmax_xent_batch(self.forward(ids, history), targets)[0]

        def compute_grads():
            self.zero_grads()
            _, _, dlogits = self.loss(ids, history, targets)
            self.backward(dlogits)

        return _gradcheck(self.layers(), loss_fn, compute_grads,
                          per_layer=per_layer, h=h, seed=seed)


def build_model(config: ModelConfig, emb: EmbeddingMatrix) -> DAModel:
    return DAModel(config, emb)


def predict_dialogue(model: DAModel, utterance_ids, use_history: bool | None
                     = None) -> list[int]:
    """Classify a dialogue's utterances in turn order.

    With history, utterance t is conditioned on the one-hot of the model's
    own argmax prediction at t-1 (greedy decoding); the first utterance
    gets the zero vector. Argmax ties break toward the lowest class index.
    """
    if use_history is None:
        use_history = model.config.use_history
    if use_history and not model.config.use_history:
        raise DataError("model was built without a history input")
    k = model.config.tag_count
    if not use_history:
        ids = np.stack(utterance_ids)
        hist = (np.zeros((len(utterance_ids), k))
                if model.config.use_history else None)
        logits = model.forward(ids, hist)
        return [int(np.argmax(row)) for row in logits]
    preds = []
    prev: int | None = None
    for ids in utterance_ids:
        logits = model.forward(np.asarray(ids)[None, :],
                               one_hot(prev, k)[None, :])
        prev = int(np.argmax(logits[0]))
        preds.append(prev)
    return preds


# -- checkpoints -------------------------------------------------------------

def save_checkpoint(model: DAModel, path: str | Path,
                    tag_set=None) -> None:
    """Versioned checkpoint: config + named parameter tensors, byte-exact."""
    meta = {"version": CHECKPOINT_VERSION,
            "config": asdict(model.config),
            "tag_set": list(tag_set) if tag_set is not None else None}
    arrays = {"embedding.weight": model.embedding.weight.value}
    for p in model.parameters():
        arrays[p.name] = p.value
    np.savez(path, __meta__=np.frombuffer(
        json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)


def load_checkpoint(path: str | Path):
    """Returns (model, tag_set)."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
        if meta["version"] != CHECKPOINT_VERSION:
            raise DataError(
                f"unsupported checkpoint version {meta['version']}")
        config = ModelConfig(**meta["config"])
        emb_value = data["embedding.weight"]
        emb = EmbeddingMatrix(matrix=emb_value.copy(),
                              dim=config.emb_dim,
                              trainable=config.embedding_mode == "trainable")
        model = DAModel(config, emb)
        for p in model.parameters():
            p.value[...] = data[p.name]
        model.embedding.weight.value[...] = emb_value
        tag_set = meta["tag_set"]
    return model, (tuple(tag_set) if tag_set is not None else None)
