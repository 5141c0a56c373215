#!/usr/bin/env python3
"""Benchmark the compiled convolution kernels against the numpy fallback.

Runs the forward and backward hot kernels on the shapes the classifiers
actually use (window 15 x EMB 300 inputs) and prints per-call timings for
both backends plus the speedup. The two forwards must agree bitwise; the
backwards to rounding error.

Usage: python benchmarks/bench_conv.py [--repeats N] [--batch N]
"""

import argparse
import importlib
import time

import numpy as np

from dialact.nn import _conv_np

try:
    from dialact.nn import _conv_cy
except ImportError:
    _conv_cy = None

CASES = [
    # name, (batch, h, w, cin), (kh, kw, cin, cout)
    ("cnn1 4x1x40", (32, 15, 300, 1), (4, 1, 1, 40)),
    ("cnn2 3xEMB", (32, 15, 300, 1), (3, 300, 1, 100)),
    ("cnn2 5xEMB", (32, 15, 300, 1), (5, 300, 1, 100)),
    ("toy 16d", (32, 15, 16, 1), (4, 16, 1, 100)),
]


def time_call(fn, args, repeats):
    fn(*args)  # warm-up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--batch", type=int, help="override the batch size")
    args = ap.parse_args()

    if _conv_cy is None:
        print("compiled extension not available; benchmarking numpy only")
    backends = [("numpy", _conv_np)]
    if _conv_cy is not None:
        backends.append(("cython", _conv_cy))

    rng = np.random.default_rng(0)
    header = f"{'case':14} {'pass':8}" + "".join(
        f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)

    for name, x_shape, k_shape in CASES:
        if args.batch:
            x_shape = (args.batch,) + x_shape[1:]
        x = rng.standard_normal(x_shape)
        kern = rng.standard_normal(k_shape)
        bias = rng.standard_normal(k_shape[-1])
        out_ref = _conv_np.conv2d_forward(x, kern, bias)
        dout = rng.standard_normal(out_ref.shape)

        if _conv_cy is not None:
            assert (_conv_cy.conv2d_forward(x, kern, bias).tobytes()
                    == out_ref.tobytes()), "forward results diverged"
            for a, b in zip(_conv_cy.conv2d_backward(x, kern, dout),
                            _conv_np.conv2d_backward(x, kern, dout)):
                np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)

        for pass_name, call_args, attr in (
                ("forward", (x, kern, bias), "conv2d_forward"),
                ("backward", (x, kern, dout), "conv2d_backward")):
            times = [time_call(getattr(mod, attr), call_args, args.repeats)
                     for _, mod in backends]
            row = f"{name:14} {pass_name:8}" + "".join(
                f"{t * 1e3:10.2f}ms" for t in times)
            if len(times) == 2:
                row += f"{times[0] / times[1]:9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
