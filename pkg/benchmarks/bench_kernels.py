"""Benchmark the incomplete-Gamma kernels: numba path vs numpy fallback.

Run with the package installed:

    python3 benchmarks/bench_kernels.py [--sizes 1000,10000,100000] [--repeats 5]

Both implementations live in ``canardexp.kernels`` regardless of which one the
package selected at import time, so a single process can time them head to
head.  The first numba call includes JIT compilation and is excluded by a
warmup pass.
"""

import argparse
import math
import time

import numpy as np

from canardexp import kernels


def time_best(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--m", type=float, default=0.25,
                    help="Gamma parameter (boundary-layer range is (0, 1])")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not kernels.USE_NUMBA:
        print("numba path disabled by CANARDEXP_NO_NUMBA; "
              "timing the fallback only")

    m = args.m
    gm = math.gamma(m)
    rng = np.random.default_rng(0)

    print(f"m = {m}, repeats = {args.repeats} (best-of)")
    header = f"{'n':>9}  {'numpy (ms)':>12}  {'numba (ms)':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        # mixed regime: half below the series/CF switch, half above
        us = np.concatenate([rng.uniform(0.0, m + 1.0, n // 2),
                             rng.uniform(m + 1.0, 500.0, n - n // 2)])
        t_np = time_best(lambda: kernels._gs_numpy(m, us, gm), args.repeats)
        if kernels.USE_NUMBA:
            out = np.empty(n)
            kernels._gs_array_loop(m, us, gm, out)  # warmup / JIT
            t_nb = time_best(lambda: kernels._gs_array_loop(m, us, gm, out),
                             args.repeats)
            ref = kernels._gs_numpy(m, us, gm)
            assert np.allclose(out, ref, rtol=1e-13)
            print(f"{n:>9}  {1e3 * t_np:>12.3f}  {1e3 * t_nb:>12.3f}  "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>9}  {1e3 * t_np:>12.3f}  {'-':>12}  {'-':>8}")


if __name__ == "__main__":
    main()
