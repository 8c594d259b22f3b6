"""Time each kernel under both backends on ten-photon sized inputs.

    python benchmarks/bench_kernels.py [--repeat 20]

The numba column includes nothing of the JIT compile: one warmup call per
kernel runs before the clock starts.
"""

import argparse
import time

import numpy as np

from ghzlab._kernels import available_backends, get_backend


def cases(rng):
    n = 10
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    u = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    probs = np.abs(psi) ** 2
    weights = rng.random(512)
    factors = rng.random((512, n, 2))
    x = np.linspace(-3, 3, 256)
    return {
        "rotate_qubits": (psi, u),
        "parity_expectation": (probs,),
        "product_distribution": (weights, factors),
        "gaussian_grid": (x, x, 1.3, -0.4, 0.9),
    }


def bench(fn, args, repeat):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
    inputs = cases(rng)
    backends = available_backends()
    print(f"{'kernel':<22}" + "".join(f"{b:>14}" for b in backends) + ("  speedup" if len(backends) == 2 else ""))
    for name, kargs in inputs.items():
        times = [bench(getattr(get_backend(b), name), kargs, args.repeat) for b in backends]
        row = f"{name:<22}" + "".join(f"{t * 1e6:>11.1f} us" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:6.2f}x"
        print(row)


if __name__ == "__main__":
    main()
