"""Compare the compiled form-statistics scan with the numpy fallback.

    python benchmarks/bench_kernels.py [--limit N] [--repeat R]
"""

import argparse
import time

import numpy as np

from singmod import _kernels_py, kernels


def best_of(fn, limit, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(limit)
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--limit", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    t_py, ref = best_of(_kernels_py.form_stats, args.limit, args.repeat)
    print(f"numpy fallback  limit={args.limit}: {t_py:.3f} s")
    if kernels.BACKEND != "cython":
        print("compiled extension not built; nothing to compare")
        return
    from singmod import _kernels

    t_cy, out = best_of(_kernels.form_stats, args.limit, args.repeat)
    same = all(np.array_equal(a, b) for a, b in zip(out, ref))
    print(f"cython kernel   limit={args.limit}: {t_cy:.3f} s")
    print(f"speedup {t_py / t_cy:.1f}x, outputs identical: {same}")


if __name__ == "__main__":
    main()
