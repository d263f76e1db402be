"""Throughput of the last-passage kernels: numba vs the numpy fallback.

    python benchmarks/bench_kernels.py [--N 128] [--replicas 2000]

Both paths consume the same random stream, so the benchmark also asserts that
their outputs are identical.
"""
import argparse
import time

import numpy as np

from pngdet import _kernels


def bench(fn, *args, repeat=3):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--replicas", type=int, default=2000)
    ap.add_argument("--q", type=float, default=0.25)
    args = ap.parse_args()
    keys = _kernels.replica_keys(1, 0, args.replicas)
    thr = _kernels.geometric_thresholds(args.q)
    cells = args.replicas * args.N * (2 * args.N - 1)
    if _kernels.HAVE_NUMBA:
        _kernels.lpp_antidiagonal(keys[:2], 4, thr, use_numba=True)  # compile
        t_nb, a = bench(_kernels.lpp_antidiagonal, keys, args.N, thr, True)
        print(f"numba : {t_nb:8.3f} s  {cells / t_nb / 1e6:8.1f} Mcells/s")
    else:
        a = None
        print("numba : unavailable")
    t_np, b = bench(_kernels.lpp_antidiagonal, keys, args.N, thr, False, repeat=1)
    print(f"numpy : {t_np:8.3f} s  {cells / t_np / 1e6:8.1f} Mcells/s")
    if a is not None:
        assert np.array_equal(a, b), "backends disagree"
        print(f"speedup {t_np / t_nb:.1f}x, outputs identical")


if __name__ == "__main__":
    main()
