"""Compare the compiled and numpy Monte Carlo kernels.

Usage: python benchmarks/bench_kernels.py [--shots N] [--ancillas K] [--repeat R]
"""
import argparse
import time

import numpy as np

from cooltrace import _kernels_py
from cooltrace._rng import derive_key

try:
    from cooltrace import _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--shots", type=int, default=10**6)
    parser.add_argument("--ancillas", type=int, default=3)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    key = derive_key(1, 1)
    sp = np.full(args.ancillas, 0.1)
    m = np.full(args.ancillas, 0.05)
    backends = {"numpy": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    results = {}
    for name, mod in backends.items():
        t_counts, counts = best_of(
            lambda: mod.mbac_counts(key, 0, args.shots, 0.1, 0.05, sp, m), args.repeat
        )
        trials = max(args.shots // 10, 1)
        t_runs, runs = best_of(
            lambda: mod.runs_to_success(key, 0, trials, 0.1, sp, m, 10**6), args.repeat
        )
        results[name] = (counts, runs)
        print(
            f"{name:>7}: mbac_counts {args.shots} shots {t_counts:.4f}s "
            f"({args.shots / t_counts / 1e6:.1f} M shots/s); "
            f"runs_to_success {trials} trials {t_runs:.4f}s"
        )
    if len(results) == 2:
        same = results["numpy"] == results["cython"]
        print(f"outputs identical: {same}")


if __name__ == "__main__":
    main()
