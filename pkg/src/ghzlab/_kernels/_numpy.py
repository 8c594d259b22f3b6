"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_numba``; the two
must agree to floating-point round-off (see tests/test_kernels.py).

Dense qubit arrays use MSB-first indexing: the leftmost character of an
outcome string is the most significant bit, so index order equals the
lexicographic order of the strings ('+' < '-', 'H' < 'V').
"""

import numpy as np

_CHUNK = 256


def rotate_qubits(psi, u):
    """Apply the same 2x2 matrix ``u`` to every qubit of a dense state."""
    n = int(psi.size).bit_length() - 1
    t = np.asarray(psi, dtype=np.complex128).reshape((2,) * n)
    u = np.asarray(u, dtype=np.complex128)
    for axis in range(n):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [axis])), 0, axis)
    return np.ascontiguousarray(t).reshape(-1)


def parity_expectation(probs):
    """Sum of p_i * (-1)**popcount(i)."""
    probs = np.asarray(probs, dtype=np.float64)
    idx = np.arange(probs.size)
    parity = np.zeros(probs.size, dtype=np.int64)
    while idx.any():
        parity ^= idx & 1
        idx = idx >> 1
    return float(np.sum(np.where(parity == 0, probs, -probs)))


def product_distribution(weights, factors):
    """out[r] = sum_c weights[c] * prod_q factors[c, q, bit_q(r)].

    ``factors`` has shape (C, N, 2); bit q of r is counted from the left.
    """
    weights = np.asarray(weights, dtype=np.float64)
    factors = np.asarray(factors, dtype=np.float64)
    n_conf, n_q, _ = factors.shape
    out = np.zeros(1 << n_q)
    for start in range(0, n_conf, _CHUNK):
        acc = weights[start:start + _CHUNK, None]
        f = factors[start:start + _CHUNK]
        for q in range(n_q):
            acc = (acc[:, :, None] * f[:, q, None, :]).reshape(acc.shape[0], -1)
        out += acc.sum(axis=0)
    return out


def gaussian_grid(x, y, pxx, pxy, pyy):
    """exp(-(pxx x^2 + 2 pxy x y + pyy y^2) / 2) on the outer grid of x and y."""
    x = np.asarray(x, dtype=np.float64)[:, None]
    y = np.asarray(y, dtype=np.float64)[None, :]
    return np.exp(-0.5 * (pxx * x * x + 2.0 * pxy * x * y + pyy * y * y))
