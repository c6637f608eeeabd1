"""Benchmark the hot kernel (batched odd-series reversion) on the grid
sizes the certification sweeps use, numba path against the numpy fallback.

Run:  python benchmarks/bench_kernels.py [--grid N] [--order K] [--repeats R]
"""

import argparse
import time

import numpy as np

from pqnorm import _kernels
from pqnorm.krivine import f_bar_w_coeffs


def grid_batch(n, M):
    vals = np.linspace(0.0, 1.0, n)
    aa, bb = np.meshgrid(vals, vals, indexing="ij")
    return f_bar_w_coeffs(aa.ravel(), bb.ravel(), M).reshape(-1, M + 1)


def bench(fn, F, repeats):
    fn(F[:2].copy())  # warm up (JIT compilation on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(F)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=101)
    ap.add_argument("--order", type=int, default=60)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    M = (args.order - 1) // 2
    F = grid_batch(args.grid, M)
    print(f"batch: {F.shape[0]} series of compressed order {M} "
          f"(truncation order {args.order})")

    t_np = bench(_kernels._revert_odd_batch_np, F, args.repeats)
    print(f"numpy fallback : {t_np * 1e3:9.2f} ms")
    if _kernels.NUMBA_ENABLED:
        Fc = np.ascontiguousarray(F)
        t_nb = bench(_kernels._revert_odd_batch_jit, Fc, args.repeats)
        print(f"numba njit     : {t_nb * 1e3:9.2f} ms   (speedup {t_np / t_nb:.1f}x)")
        g1 = _kernels._revert_odd_batch_np(F)
        g2 = _kernels._revert_odd_batch_jit(Fc)
        print(f"max |difference|: {np.max(np.abs(g1 - g2)):.3e}")
    else:
        print("numba unavailable or disabled (PQNORM_NO_NUMBA); numpy path only")


if __name__ == "__main__":
    main()
