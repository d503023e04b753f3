"""Benchmark the numba kernels against their numpy fallbacks.

Runs both implementations of each hot kernel on study-sized inputs and
prints a timing table. Usage:

    python benchmarks/bench_kernels.py [--repeats 5]

The package-level dispatch is controlled by JNDSCALE_NO_NUMBA; this script
imports both implementations directly so one process covers both paths.
"""

import argparse
from timeit import default_timer as timer

import numpy as np

from jndscale._kernels import (
    _pair_loglik_numba,
    _pair_loglik_numpy,
    _resample_axis_numba,
    _resample_axis_numpy,
)
from jndscale.accel import NUMBA_ENABLED
from jndscale.imaging import lanczos_weights


def time_fn(fn, *args, repeats):
    fn(*args)  # warm-up (includes JIT compilation for the numba path)
    best = np.inf
    for _ in range(repeats):
        t0 = timer()
        fn(*args)
        best = min(best, timer() - t0)
    return best


def bench_resample(repeats):
    # one channel of a 620x800 study image upscaled 2x, as in zoom boosting
    rng = np.random.default_rng(0)
    img = rng.random((800, 310))
    idx, w = lanczos_weights(310, 620)
    args = (img, idx, w)
    return {
        "kernel": "lanczos resample (800x310 -> 800x620)",
        "numba": time_fn(_resample_axis_numba, *args, repeats=repeats),
        "numpy": time_fn(_resample_axis_numpy, *args, repeats=repeats),
    }


def bench_loglik(repeats):
    # one source's BTC comparison graph: 51 stimuli, all same-codec pairs
    rng = np.random.default_rng(1)
    n = 51
    counts = rng.integers(0, 40, size=(n, n)).astype(np.float64)
    np.fill_diagonal(counts, 0.0)
    scales = rng.normal(0.0, 1.5, n)
    args = (counts, scales, 1e-6)

    def many_numba(c, s, eps):
        for _ in range(100):
            _pair_loglik_numba(c, s, eps)

    def many_numpy(c, s, eps):
        for _ in range(100):
            _pair_loglik_numpy(c, s, eps)

    return {
        "kernel": "pairwise log-likelihood (51 nodes, x100)",
        "numba": time_fn(many_numba, *args, repeats=repeats),
        "numpy": time_fn(many_numpy, *args, repeats=repeats),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not NUMBA_ENABLED:
        print("note: JNDSCALE_NO_NUMBA is set; the 'numba' column still uses the")
        print("identity-decorated python loops and will be very slow.\n")

    rows = [bench_resample(args.repeats), bench_loglik(args.repeats)]
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for r in rows:
        speedup = r["numpy"] / r["numba"]
        print(
            f"{r['kernel'].ljust(width)}  {r['numba'] * 1e3:>8.2f}ms  "
            f"{r['numpy'] * 1e3:>8.2f}ms  {speedup:>7.1f}x"
        )


if __name__ == "__main__":
    main()
