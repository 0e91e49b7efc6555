#!/usr/bin/env python3
"""Benchmark the numba-compiled amplitude kernel against the numpy fallback.

The amplitude sampler is the hot inner loop of every kernel build; the SVD
that follows it is LAPACK either way.  Run with BIPHOTON_DISABLE_NUMBA=1 to
confirm the fallback selection, or run this script directly to compare both
implementations side by side:

    python benchmarks/kernel_benchmark.py [--sizes 256,512,1024] [--repeats 5]
"""

import argparse
import time

import numpy as np

from biphoton._evaluate import USING_NUMBA, amplitude_matrix_numba, amplitude_matrix_numpy


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,512,1024,2048")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    dp = np.array([6.0, 0.0, -6.0])
    dq = np.zeros(3)
    theta = np.array([1.0, 0.0, 5.0])

    print(f"active path at import: {'numba' if USING_NUMBA else 'numpy'}")
    if amplitude_matrix_numba is None:
        print("numba not importable; timing the numpy path only")

    header = f"{'n':>6} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        nodes = np.linspace(-300.0, 300.0, n)
        t_np = time_call(amplitude_matrix_numpy, nodes, nodes, dp, dq, theta,
                         5.0, 0.25, repeats=args.repeats)
        if amplitude_matrix_numba is not None:
            amplitude_matrix_numba(nodes, nodes, dp, dq, theta, 5.0, 0.25)  # JIT warm-up
            t_nb = time_call(amplitude_matrix_numba, nodes, nodes, dp, dq, theta,
                             5.0, 0.25, repeats=args.repeats)
            jit_m, _ = amplitude_matrix_numba(nodes, nodes, dp, dq, theta, 5.0, 0.25)
            ref_m, _ = amplitude_matrix_numpy(nodes, nodes, dp, dq, theta, 5.0, 0.25)
            worst = float(np.max(np.abs(jit_m - ref_m)))
            assert worst < 1e-12, f"paths disagree by {worst:.2e} at n={n}"
            print(f"{n:>6} {t_np * 1e3:>10.1f}ms {t_nb * 1e3:>10.1f}ms {t_np / t_nb:>8.2f}x")
        else:
            print(f"{n:>6} {t_np * 1e3:>10.1f}ms {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
