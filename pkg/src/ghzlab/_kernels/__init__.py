"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once, at import time, from the ``GHZLAB_BACKEND``
environment variable:

``auto`` (default)
    numba when it imports cleanly, numpy otherwise.
``numba``
    numba, failing loudly if it is not installed.
``numpy``
    the pure-numpy implementations.

Both backends stay importable through :func:`get_backend` so tests and the
benchmark can compare them directly.
"""

import importlib
import os

KERNELS = ("rotate_qubits", "parity_expectation", "product_distribution", "gaussian_grid")


def _numba_available():
    try:
        importlib.import_module("numba")
    except ImportError:
        return False
    return True


def available_backends():
    return ("numpy", "numba") if _numba_available() else ("numpy",)


def get_backend(name):
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f"{__name__}._{name}")


def _select():
    requested = os.environ.get("GHZLAB_BACKEND", "auto").strip().lower()
    if requested == "auto":
        return "numba" if _numba_available() else "numpy"
    if requested == "numba" and not _numba_available():
        raise ImportError("GHZLAB_BACKEND=numba but numba is not installed")
    if requested not in ("numpy", "numba"):
        raise ValueError(f"GHZLAB_BACKEND must be auto, numba or numpy, got {requested!r}")
    return requested


BACKEND = _select()
_impl = get_backend(BACKEND)

rotate_qubits = _impl.rotate_qubits
parity_expectation = _impl.parity_expectation
product_distribution = _impl.product_distribution
gaussian_grid = _impl.gaussian_grid
