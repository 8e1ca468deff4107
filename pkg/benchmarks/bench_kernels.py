"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs each hot kernel at production-like sizes on both implementations and
prints per-kernel timings with the speedup factor.  The numba column needs
numba importable and MEASURELAB_NO_NUMBA unset (the numpy path is always
available through the implementation table regardless of the env flag).

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from measurelab._kernels import IMPLEMENTATIONS


def _best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases():
    gen = np.random.default_rng(0)

    # folded product-grid reductions at the d=3 sizes the scans use
    n_axis = 129  # folded axis of a 256^3 momentum grid
    vals = np.sort(gen.uniform(0.0, 400.0, n_axis))
    wts = np.full(n_axis, 2.0)
    wts[0] = wts[-1] = 1.0
    yield "folded_power_sum d=3 (129^3)", "folded_power_sum", (vals, wts, 1.0, -1.5, 3)
    yield "folded_power_sum d=2 (513^2)", "folded_power_sum", (
        np.sort(gen.uniform(0.0, 400.0, 513)), np.full(513, 2.0), 1.0, -0.7, 2,
    )

    # cylinder prefix counting at the acceptance scale
    inside = gen.uniform(size=(100_000, 44)) < 0.9
    yield "prefix_all_count (1e5 x 44)", "prefix_all_count", (inside,)

    # trigonometric polynomial Monte-Carlo evaluation
    coeffs = gen.uniform(-1, 1, 16) + 1j * gen.uniform(-1, 1, 16)
    mvecs = gen.integers(-4, 5, (16, 4)).astype(np.int64)
    thetas = gen.uniform(0, 2 * np.pi, (20_000, 4))
    yield "trig_eval (2e4 x 16 terms)", "trig_eval", (coeffs, mvecs, thetas)


def main():
    parser = argparse.ArgumentParser(description="kernel benchmark: numba vs numpy")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    have_numba = "numba" in IMPLEMENTATIONS
    if not have_numba:
        print("numba path unavailable (disabled or not importable); timing numpy only")
    header = f"{'kernel':36s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, name, call_args in _cases():
        np_fn = IMPLEMENTATIONS["numpy"][name]
        t_np = _best_of(np_fn, call_args, args.repeats)
        if have_numba:
            nb_fn = IMPLEMENTATIONS["numba"][name]
            nb_fn(*call_args)  # compile outside the timed region
            t_nb = _best_of(nb_fn, call_args, args.repeats)
            print(f"{label:36s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")
        else:
            print(f"{label:36s} {t_np * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
