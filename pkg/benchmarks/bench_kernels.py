#!/usr/bin/env python3
"""Benchmark the compiled subset-scan kernel against the NumPy fallback.

Times single pair scans across element counts and a full brute-force
verification workload, then prints one row per case with the speedup.

    python benchmarks/bench_kernels.py [--json] [--repeat N]
"""

import argparse
import json
import math
import time

import numpy as np

from dpcat import CategorySpace, ExponentialSpec, HammingUtility, PrivacyParams
from dpcat import kernels
from dpcat.verifier import verify_bruteforce


def time_call(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_pair_scans(repeat):
    rows = []
    rng = np.random.default_rng(1)
    for k in (8, 12, 16, 20, 24):
        p_a = rng.random(k)
        p_a /= p_a.sum()
        p_b = rng.random(k)
        p_b /= p_b.sum()
        row = {"case": f"pair-scan k={k}", "subsets": 2 ** k - 2}
        for name in kernels.available_backends():
            impl = kernels.get_backend(name)
            reps = repeat if k <= 20 else 1
            row[name] = time_call(
                lambda: impl.subset_scan(p_a, p_b, 1.5, 0.01, False), reps)
        rows.append(row)
    return rows


def bench_verify(repeat):
    rows = []
    for m, n in ((2, 2), (3, 2)):
        space = CategorySpace(tuple(f"c{i}" for i in range(m + 1)))
        params = PrivacyParams(0.5, 0.0)
        row = {"case": f"brute-force verify m={m} n={n}",
               "subsets": (2 ** ((m + 1) ** n) - 2) * n * m * (m + 1) ** n}
        for name in kernels.available_backends():
            import dpcat.verifier as verifier_mod
            impl = kernels.get_backend(name)

            def run():
                spec = ExponentialSpec(space, n, HammingUtility(1.0))
                saved = kernels._impl
                kernels._impl = impl
                try:
                    verify_bruteforce(spec, params)
                finally:
                    kernels._impl = saved

            row[name] = time_call(run, repeat)
        rows.append(row)
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", action="store_true")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rows = bench_pair_scans(args.repeat) + bench_verify(args.repeat)
    for row in rows:
        if "cython" in row and "python" in row:
            row["speedup"] = row["python"] / row["cython"]
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    backends = kernels.available_backends()
    header = f"{'case':32} {'subsets':>14} " + " ".join(
        f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f" {'speedup':>9}"
    print(header)
    for row in rows:
        line = f"{row['case']:32} {row['subsets']:>14,} " + " ".join(
            f"{row[b] * 1000:>10.2f}ms" for b in backends)
        if "speedup" in row:
            line += f" {row['speedup']:>8.1f}x"
        print(line)
    if len(backends) == 1:
        print("\n(compiled kernel not available; showing pure backend only)")


if __name__ == "__main__":
    main()
