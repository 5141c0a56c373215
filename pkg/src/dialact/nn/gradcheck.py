"""Central-difference gradient verification."""

from __future__ import annotations

import numpy as np


def gradcheck(layers, loss_fn, compute_grads, per_layer: int = 200,
              h: float = 1e-5, seed: int = 0) -> float:
    """Compare analytic gradients against central finite differences.

    `loss_fn()` evaluates the scalar loss with the current parameter
    values; `compute_grads()` zeroes all gradients and runs one
    forward/backward pass. Up to `per_layer` parameter entries are sampled
    per layer. Returns the maximum relative error, where the relative
    error uses a small absolute floor so near-zero gradient pairs compare
    absolutely.

    ReLU kinks and pooling argmax ties make the loss nonsmooth, so an
    entry whose perturbation interval straddles such a point can fail at
    the nominal step even when the gradient is correct. Suspect entries
    are therefore re-estimated at smaller steps and the best estimate
    kept; a genuine gradient bug persists at every step size.
    """
    rng = np.random.default_rng(seed)
    compute_grads()
    analytic = {id(p): p.grad.copy() for layer in layers for p in
                layer.params()}

    def central(flat, i, step):
        orig = flat[i]
        flat[i] = orig + step
        lp = loss_fn()
        flat[i] = orig - step
        lm = loss_fn()
        flat[i] = orig
        return (lp - lm) / (2.0 * step)

    def rel_err(a, num):
        return abs(a - num) / max(abs(a), abs(num), 1e-3)

    max_err = 0.0
    for layer in layers:
        for p in layer.params():
            flat = p.value.reshape(-1)
            size = flat.shape[0]
            if size <= per_layer:
                idxs = np.arange(size)
            else:
                idxs = rng.choice(size, size=per_layer, replace=False)
            if p.frozen_mask is not None:
                frozen = p.frozen_mask.reshape(-1)
                idxs = np.array([i for i in idxs if not frozen[i]],
                                dtype=np.int64)
            a = analytic[id(p)].reshape(-1)
            for i in idxs:
                err = rel_err(a[i], central(flat, i, h))
                for smaller in (h / 10.0, h / 100.0):
                    if err <= 1e-5:
                        break
                    err = min(err, rel_err(a[i], central(flat, i, smaller)))
                if err > max_err:
                    max_err = err
    return max_err
