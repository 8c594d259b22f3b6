"""numba-compiled twins of the kernels in ``_numpy``."""

import numba
import numpy as np


@numba.njit(cache=True)
def _rotate_qubits(psi, u):
    out = psi.copy()
    size = out.size
    n = 0
    while (1 << n) < size:
        n += 1
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for b in range(n):
        step = 1 << b
        for i in range(size):
            if i & step:
                continue
            a0 = out[i]
            a1 = out[i | step]
            out[i] = u00 * a0 + u01 * a1
            out[i | step] = u10 * a0 + u11 * a1
    return out


def rotate_qubits(psi, u):
    return _rotate_qubits(np.ascontiguousarray(psi, dtype=np.complex128),
                          np.ascontiguousarray(u, dtype=np.complex128))


@numba.njit(cache=True)
def _parity_expectation(probs):
    total = 0.0
    for i in range(probs.size):
        x = i
        par = 0
        while x:
            par ^= x & 1
            x >>= 1
        if par:
            total -= probs[i]
        else:
            total += probs[i]
    return total


def parity_expectation(probs):
    return float(_parity_expectation(np.ascontiguousarray(probs, dtype=np.float64)))


@numba.njit(cache=True)
def _product_distribution(weights, factors):
    n_conf, n_q, _ = factors.shape
    size = 1 << n_q
    out = np.zeros(size)
    buf = np.empty(size)
    for c in range(n_conf):
        w = weights[c]
        if w == 0.0:
            continue
        buf[0] = w
        width = 1
        for q in range(n_q):
            f0 = factors[c, q, 0]
            f1 = factors[c, q, 1]
            for j in range(width - 1, -1, -1):
                v = buf[j]
                buf[2 * j + 1] = v * f1
                buf[2 * j] = v * f0
            width *= 2
        for r in range(size):
            out[r] += buf[r]
    return out


def product_distribution(weights, factors):
    return _product_distribution(np.ascontiguousarray(weights, dtype=np.float64),
                                 np.ascontiguousarray(factors, dtype=np.float64))


@numba.njit(cache=True)
def _gaussian_grid(x, y, pxx, pxy, pyy):
    out = np.empty((x.size, y.size))
    for i in range(x.size):
        xi = x[i]
        for j in range(y.size):
            yj = y[j]
            out[i, j] = np.exp(-0.5 * (pxx * xi * xi + 2.0 * pxy * xi * yj + pyy * yj * yj))
    return out


def gaussian_grid(x, y, pxx, pxy, pyy):
    return _gaussian_grid(np.ascontiguousarray(x, dtype=np.float64),
                          np.ascontiguousarray(y, dtype=np.float64),
                          float(pxx), float(pxy), float(pyy))
