"""Timing comparison of the numba kernels against the pure-numpy fallbacks.

Run directly: python3 benchmarks/bench_kernels.py [--repeat N]

The numba path is what `import fasmap` uses by default; setting
FASMAP_NO_NUMBA=1 makes the package itself fall back to the numpy versions
benchmarked here.
"""
import argparse
import time

import numpy as np

from fasmap import kernels


def _time(fn, *args, repeat=5):
    fn(*args)   # warm-up (JIT compile, cache touch)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    # LoS visibility: one 50x50 grid against 3 obstacles
    px = rng.uniform(0, 50, 2500)
    py = rng.uniform(0, 50, 2500)
    rects = np.array([[5, 5, 13, 13], [30, 10, 38, 18], [12, 30, 20, 38]],
                     dtype=np.float64)
    cases = [("los_flags (2500 pts, 3 rects)",
              kernels.los_flags, kernels.los_flags_numpy,
              (25.0, 25.0, px, py, rects))]

    # IDW: one mode slice at 12% sampling
    ox = rng.uniform(0, 50, 300)
    oy = rng.uniform(0, 50, 300)
    vals = rng.normal(size=300)
    cases.append(("idw (2500 targets, 300 obs, k=5)",
                  kernels.idw, kernels.idw_numpy,
                  (px, py, ox, oy, vals, 5, 2.0)))

    # grouped per-cell solve: one ADMM primal update
    inv_stack = rng.normal(size=(60, 12, 12))
    group = rng.integers(0, 60, size=2500)
    rhs = rng.normal(size=(2500, 12))
    cases.append(("grouped_solve (2500 cells, M=12)",
                  kernels.grouped_solve, kernels.grouped_solve_numpy,
                  (inv_stack, group, rhs)))

    print(f"numba available and enabled: {kernels.USE_NUMBA}")
    print(f"{'kernel':<38} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, fast, slow, a in cases:
        t_fast = _time(fast, *a, repeat=args.repeat)
        t_slow = _time(slow, *a, repeat=args.repeat)
        print(f"{name:<38} {t_fast * 1e3:>8.3f}ms {t_slow * 1e3:>8.3f}ms "
              f"{t_slow / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
