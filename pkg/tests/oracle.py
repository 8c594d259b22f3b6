"""Independent reference computations used by the tests.

Nothing here goes through the package's sparse term algebra: states are
dense numpy vectors and linear optics is evaluated with matrix permanents.
"""

import itertools
import math

import numpy as np

PLUS = np.array([1, 1]) / math.sqrt(2)


def kron_all(vectors):
    out = np.array([1.0 + 0j])
    for v in vectors:
        out = np.kron(out, v)
    return out


def ghz_dense(n):
    v = np.zeros(2 ** n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


def rotated_probs(psi, theta):
    """Dense outcome probabilities; outcome bit 1 means '-' (MSB first)."""
    n = int(math.log2(psi.size))
    bras = [np.array([1, np.exp(-1j * theta)]) / math.sqrt(2),
            np.array([1, -np.exp(-1j * theta)]) / math.sqrt(2)]
    out = np.empty(2 ** n)
    for i, bits in enumerate(itertools.product((0, 1), repeat=n)):
        out[i] = abs(kron_all([bras[b] for b in bits]) @ psi) ** 2
    return out


def permanent(m):
    n = m.shape[0]
    if n == 0:
        return 1.0
    total = 0j
    for perm in itertools.permutations(range(n)):
        total += np.prod([m[i, perm[i]] for i in range(n)])
    return total


def linear_optics(u, inputs, outputs):
    """<outputs|U|inputs> for occupation lists over the same set of modes."""
    rows = [i for i, n in enumerate(outputs) for _ in range(n)]
    cols = [i for i, n in enumerate(inputs) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    norm = math.sqrt(np.prod([math.factorial(n) for n in inputs]) * np.prod([math.factorial(n) for n in outputs]))
    return permanent(sub) / norm


def pbs_unitary():
    """Single-photon map on modes (2H, 2V, 4H, 4V): H transmits, V swaps."""
    u = np.zeros((4, 4))
    u[0, 0] = u[2, 2] = 1
    u[3, 1] = u[1, 3] = 1
    return u


def star_then_hadamards(n):
    """Dense star graph state (center = qubit 0) with H on every leaf."""
    psi = kron_all([PLUS] * n)
    for i, bits in enumerate(itertools.product((0, 1), repeat=n)):
        if bits[0] and sum(bits[1:]) % 2:
            psi[i] *= -1
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    ops = [np.eye(2)] + [h] * (n - 1)
    full = ops[0]
    for o in ops[1:]:
        full = np.kron(full, o)
    return full @ psi
