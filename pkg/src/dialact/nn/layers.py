"""Dense-tensor layers with reverse-mode gradients.

Every layer operates on float64 batches (leading N axis), caches what its
backward pass needs during forward, and accumulates parameter gradients
into Parameter.grad. Weight layout and initialization:

  * dense / conv weights: Glorot uniform;
  * LSTM input weights: Glorot uniform per gate, recurrent weights
    orthogonal per gate, biases zero except the forget gate (1.0);
  * gate order in the stacked LSTM matrices is [input, forget,
    candidate, output].
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericError
from . import kernels


class Parameter:
    """A trainable tensor with an accumulated gradient of the same shape."""

    def __init__(self, value: np.ndarray, name: str, trainable: bool = True):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.name = name
        self.trainable = trainable
        # True where the gradient is structurally masked (e.g. the PAD
        # embedding row); gradient checks skip these entries.
        self.frozen_mask: np.ndarray | None = None

    def zero_grad(self):
        self.grad[...] = 0.0


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _check_finite(arr: np.ndarray, where: str):
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite values in {where}")


class Layer:
    name: str

    def params(self) -> list[Parameter]:
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator,
                 name: str):
        self.name = name
        self.w = Parameter(glorot_uniform(rng, n_in, n_out, (n_in, n_out)),
                           f"{name}.w")
        self.b = Parameter(np.zeros(n_out), f"{name}.b")

    def params(self):
        return [self.w, self.b]

    def forward(self, x):
        self._x = x
        return x @ self.w.value + self.b.value

    def backward(self, dout):
        self.w.grad += self._x.T @ dout
        self.b.grad += dout.sum(axis=0)
        return dout @ self.w.value.T


class ReLU(Layer):
    def __init__(self, name: str = "relu"):
        self.name = name

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0)


class Conv2D(Layer):
    """Valid cross-correlation over (N, H, W, Cin) inputs."""

    def __init__(self, kh: int, kw: int, cin: int, cout: int,
                 rng: np.random.Generator, name: str):
        self.name = name
        self.kh, self.kw, self.cin, self.cout = kh, kw, cin, cout
        fan_in = kh * kw * cin
        self.kern = Parameter(
            glorot_uniform(rng, fan_in, cout, (kh, kw, cin, cout)),
            f"{name}.kern")
        self.bias = Parameter(np.zeros(cout), f"{name}.bias")

    def params(self):
        return [self.kern, self.bias]

    def forward(self, x):
        self._x = x
        return kernels.conv2d_forward(x, self.kern.value, self.bias.value)

    def backward(self, dout):
        dx, dk, db = kernels.conv2d_backward(self._x, self.kern.value, dout)
        self.kern.grad += dk
        self.bias.grad += db
        return dx


class MaxOverTime(Layer):
    """Maximum over the time axis of (N, T, D, C); ties take the first
    index, and the gradient routes to exactly that element."""

    def __init__(self, name: str = "max_over_time"):
        self.name = name

    def forward(self, x):
        self._shape = x.shape
        self._arg = np.argmax(x, axis=1)                 # N, D, C
        return np.take_along_axis(x, self._arg[:, None], axis=1)[:, 0]

    def backward(self, dout):
        dx = np.zeros(self._shape, dtype=np.float64)
        np.put_along_axis(dx, self._arg[:, None], dout[:, None], axis=1)
        return dx


class Flatten(Layer):
    def __init__(self, name: str = "flatten"):
        self.name = name

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Embedding(Layer):
    """Index lookup into the |V| x EMB matrix.

    In trainable mode the matrix is a parameter and gradients are scattered
    back to the used rows; the PAD row's gradient is always masked so PAD
    stays exactly zero.
    """

    PAD = 0

    def __init__(self, matrix: np.ndarray, trainable: bool,
                 name: str = "embedding"):
        self.name = name
        self.trainable = trainable
        self.weight = Parameter(matrix, f"{name}.weight", trainable=trainable)
        mask = np.zeros(self.weight.value.shape, dtype=bool)
        mask[self.PAD] = True
        self.weight.frozen_mask = mask

    def params(self):
        return [self.weight] if self.trainable else []

    def forward(self, ids):
        self._ids = ids
        return self.weight.value[ids]

    def backward(self, dout):
        if self.trainable:
            np.add.at(self.weight.grad, self._ids, dout)
            self.weight.grad[self.PAD] = 0.0
        return None


class LSTM(Layer):
    """Single-direction LSTM over (N, T, E); returns the final hidden
    state (N, H). Set reverse=True to consume the sequence back to front."""

    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator,
                 name: str, reverse: bool = False):
        self.name = name
        self.n_in, self.n_hidden = n_in, n_hidden
        self.reverse = reverse
        h = n_hidden
        wx = np.concatenate(
            [glorot_uniform(rng, n_in, h, (n_in, h)) for _ in range(4)],
            axis=1)
        wh = np.concatenate([orthogonal(rng, h) for _ in range(4)], axis=1)
        b = np.zeros(4 * h)
        b[h:2 * h] = 1.0  # forget gate bias
        self.wx = Parameter(wx, f"{name}.wx")
        self.wh = Parameter(wh, f"{name}.wh")
        self.b = Parameter(b, f"{name}.b")

    def params(self):
        return [self.wx, self.wh, self.b]

    def step(self, x_t, h_prev, c_prev):
        """One LSTM cell step; returns (h, c, cache)."""
        h = self.n_hidden
        z = x_t @ self.wx.value + h_prev @ self.wh.value + self.b.value
        i = _sigmoid(z[:, :h])
        f = _sigmoid(z[:, h:2 * h])
        g = np.tanh(z[:, 2 * h:3 * h])
        o = _sigmoid(z[:, 3 * h:])
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h_new = o * tanh_c
        _check_finite(h_new, f"{self.name} hidden state")
        return h_new, c, (x_t, h_prev, c_prev, i, f, g, o, tanh_c)

    def forward(self, x):
        n, t, _ = x.shape
        h = np.zeros((n, self.n_hidden))
        c = np.zeros((n, self.n_hidden))
        self._caches = []
        self._order = range(t - 1, -1, -1) if self.reverse else range(t)
        for step_t in self._order:
            h, c, cache = self.step(x[:, step_t], h, c)
            self._caches.append(cache)
        self._t = t
        return h

    def backward(self, dout):
        """Backprop from the final hidden state; returns d(input)."""
        n = dout.shape[0]
        dx = np.zeros((n, self._t, self.n_in))
        dh = dout
        dc = np.zeros_like(dout)
        for step_t, cache in zip(reversed(list(self._order)),
                                 reversed(self._caches)):
            x_t, h_prev, c_prev, i, f, g, o, tanh_c = cache
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c ** 2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate([di * i * (1 - i), df * f * (1 - f),
                                 dg * (1 - g ** 2), do * o * (1 - o)], axis=1)
            self.wx.grad += x_t.T @ dz
            self.wh.grad += h_prev.T @ dz
            self.b.grad += dz.sum(axis=0)
            dx[:, step_t] = dz @ self.wx.value.T
            dh = dz @ self.wh.value.T
            dc = dc * f
        return dx


class BiLSTM(Layer):
    """Forward and backward LSTM; output is the concatenation of the two
    final hidden states (N, 2H)."""

    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator,
                 name: str = "bilstm"):
        self.name = name
        self.n_hidden = n_hidden
        self.fwd = LSTM(n_in, n_hidden, rng, f"{name}.fwd", reverse=False)
        self.bwd = LSTM(n_in, n_hidden, rng, f"{name}.bwd", reverse=True)

    def params(self):
        return self.fwd.params() + self.bwd.params()

    def forward(self, x):
        hf = self.fwd.forward(x)
        hb = self.bwd.forward(x)
        return np.concatenate([hf, hb], axis=1)

    def backward(self, dout):
        h = self.n_hidden
        return self.fwd.backward(dout[:, :h]) + self.bwd.backward(dout[:, h:])


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax_cross_entropy(logits: np.ndarray, target: int):
    """Stabilized softmax and cross-entropy loss for one K-vector.

    Returns (loss, probabilities).
    """
    logits = np.asarray(logits, dtype=np.float64)
    k = logits.shape[-1]
    if k < 2:
        raise ValueError("need at least 2 classes")
    if not 0 <= target < k:
        raise ValueError(f"target {target} out of range for {k} classes")
    loss, probs, _ = softmax_xent_batch(logits.reshape(1, -1),
                                        np.array([target]))
    return float(loss), probs[0]


def softmax_xent_batch(logits: np.ndarray, targets: np.ndarray):
    """Mean cross-entropy over a batch.

    Returns (mean loss, probabilities (N, K), d(logits) of the mean loss).
    """
    _check_finite(logits, "logits")
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    # Log-space loss: finite even when the target probability underflows.
    lse = np.log(e.sum(axis=1))
    loss = np.mean(lse - shifted[np.arange(n), targets])
    dlogits = probs.copy()
    dlogits[np.arange(n), targets] -= 1.0
    dlogits /= n
    return float(loss), probs, dlogits
