# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled valid convolution kernels.

Accumulation order per output element matches the numpy fallback exactly:
product terms in kernel row-major order (ki, kj, c), bias last, every
partial sum rounded to double. Compile with -ffp-contract=off so no FMA
contraction changes the rounding.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def conv2d_forward(cnp.ndarray x_arr, cnp.ndarray kern_arr,
                   cnp.ndarray bias_arr):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, :, ::1] kern = np.ascontiguousarray(kern_arr, dtype=np.float64)
    cdef double[::1] bias = np.ascontiguousarray(bias_arr, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], cin = x.shape[3]
    cdef Py_ssize_t kh = kern.shape[0], kw = kern.shape[1], cout = kern.shape[3]
    if kh > h or kw > w:
        raise ValueError(
            "kernel (%d,%d) larger than input (%d,%d)" % (kh, kw, h, w))
    cdef Py_ssize_t oh = h - kh + 1, ow = w - kw + 1
    out_arr = np.zeros((n, oh, ow, cout), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, i, j, f, ki, kj, c
    cdef double acc
    for b in range(n):
        for i in range(oh):
            for j in range(ow):
                for f in range(cout):
                    acc = 0.0
                    for ki in range(kh):
                        for kj in range(kw):
                            for c in range(cin):
                                acc = acc + x[b, i + ki, j + kj, c] * kern[ki, kj, c, f]
                    out[b, i, j, f] = acc + bias[f]
    return out_arr


def conv2d_backward(cnp.ndarray x_arr, cnp.ndarray kern_arr,
                    cnp.ndarray dout_arr):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, :, ::1] kern = np.ascontiguousarray(kern_arr, dtype=np.float64)
    cdef double[:, :, :, ::1] dout = np.ascontiguousarray(dout_arr, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], cin = x.shape[3]
    cdef Py_ssize_t kh = kern.shape[0], kw = kern.shape[1], cout = kern.shape[3]
    cdef Py_ssize_t oh = dout.shape[1], ow = dout.shape[2]
    dx_arr = np.zeros((n, h, w, cin), dtype=np.float64)
    dk_arr = np.zeros((kh, kw, cin, cout), dtype=np.float64)
    db_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, :, ::1] dx = dx_arr
    cdef double[:, :, :, ::1] dk = dk_arr
    cdef double[::1] db = db_arr
    cdef Py_ssize_t b, i, j, f, ki, kj, c
    cdef double g, xv, acc
    # f is innermost so dout, kern and dk are walked contiguously.
    for b in range(n):
        for i in range(oh):
            for j in range(ow):
                for f in range(cout):
                    db[f] += dout[b, i, j, f]
                for ki in range(kh):
                    for kj in range(kw):
                        for c in range(cin):
                            xv = x[b, i + ki, j + kj, c]
                            acc = 0.0
                            for f in range(cout):
                                g = dout[b, i, j, f]
                                acc += kern[ki, kj, c, f] * g
                                dk[ki, kj, c, f] += xv * g
                            dx[b, i + ki, j + kj, c] += acc
    return dx_arr, dk_arr, db_arr
