"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each workload is run on both backends; results are checked for agreement
before timings are printed.
"""
import argparse
import time

import numpy as np

from steinwsum import _kernels_py

try:
    from steinwsum import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _poisson(lam, k_max):
    k = np.arange(k_max + 1)
    logs = -lam + k * np.log(lam) - np.cumsum(np.log(np.maximum(k, 1)))
    return np.exp(logs)


def workloads(rng):
    a, b = rng.random(400), rng.random(400)
    w = rng.random(5000)
    ind = (rng.random((256, 60)) < 0.3).astype(np.uint8)
    p = _poisson(8.0, 59)
    return {
        "convolve 400x400": lambda m: m.convolve(a, b),
        "stein_series n=5000": lambda m: m.stein_series(w, 2.5),
        "stein_solve_batch 256x60": lambda m: m.stein_solve_batch(ind, p, 8.0, 120),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _close(x, y):
    if isinstance(x, tuple):
        return all(_close(u, v) for u, v in zip(x, y))
    return np.allclose(x, y, rtol=1e-12, atol=1e-15)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

    rng = np.random.default_rng(0)
    print(f"{'workload':28} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for name, fn in workloads(rng).items():
        if not _close(fn(_kernels_py), fn(_ckernels)):
            raise SystemExit(f"{name}: backends disagree")
        tp = best_of(lambda: fn(_kernels_py), args.repeat)
        tc = best_of(lambda: fn(_ckernels), args.repeat)
        print(f"{name:28} {tp * 1e3:12.3f} {tc * 1e3:12.3f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
