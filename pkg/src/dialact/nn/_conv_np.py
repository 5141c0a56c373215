"""Pure-numpy valid convolution kernels (fallback backend).

The forward accumulation order is fixed: for every output element the
product terms are summed in kernel row-major order (ki, kj, c), with the
bias added last. The compiled backend follows the identical order so the
two are bit-for-bit interchangeable.
"""

import numpy as np

BACKEND = "numpy"


def conv2d_forward(x: np.ndarray, kern: np.ndarray,
                   bias: np.ndarray) -> np.ndarray:
    """Valid cross-correlation.

    x: (N, H, W, Cin), kern: (Kh, Kw, Cin, Cout), bias: (Cout,)
    returns (N, H-Kh+1, W-Kw+1, Cout).
    """
    n, h, w, cin = x.shape
    kh, kw, _, cout = kern.shape
    if kh > h or kw > w:
        raise ValueError(f"kernel ({kh},{kw}) larger than input ({h},{w})")
    oh, ow = h - kh + 1, w - kw + 1
    out = np.zeros((n, oh, ow, cout), dtype=np.float64)
    for ki in range(kh):
        for kj in range(kw):
            for c in range(cin):
                out += x[:, ki:ki + oh, kj:kj + ow, c, None] * kern[ki, kj, c]
    out += bias
    return out


def conv2d_backward(x: np.ndarray, kern: np.ndarray, dout: np.ndarray):
    """Gradients of conv2d_forward w.r.t. input, kernel and bias."""
    n, h, w, cin = x.shape
    kh, kw, _, cout = kern.shape
    oh, ow = dout.shape[1], dout.shape[2]
    dx = np.zeros_like(x)
    dk = np.zeros_like(kern)
    for ki in range(kh):
        for kj in range(kw):
            xs = x[:, ki:ki + oh, kj:kj + ow, :]          # N,OH,OW,Cin
            dk[ki, kj] += np.einsum("nijc,nijf->cf", xs, dout)
            dx[:, ki:ki + oh, kj:kj + ow, :] += dout @ kern[ki, kj].T
    db = dout.sum(axis=(0, 1, 2))
    return dx, dk, db
