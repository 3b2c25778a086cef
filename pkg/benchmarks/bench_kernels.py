#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the two pairwise primitives over profile matrices at a few sensor
counts (t = 288 bins, the full-day profile length):

    python benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from spaceprofiler import kernels


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--bins", type=int, default=288)
    parser.add_argument("--sizes", type=int, nargs="+", default=[47, 100, 200])
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (selected: {kernels.BACKEND})")
    if "cython" not in backends:
        print("compiled backend not built; run `python setup.py build_ext --inplace`")

    rng = np.random.default_rng(0)
    header = f"{'op':24s} {'n':>5s} " + " ".join(f"{b:>12s}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9s}"
    print(header)

    for n in args.sizes:
        X = rng.random((n, args.bins))
        cases = [
            ("wied_pairwise(W=2)", lambda b: kernels.wied_pairwise(X, 2, backend=b)),
            ("minkowski_pairwise(p=2)", lambda b: kernels.minkowski_pairwise(X, 2.0, backend=b)),
        ]
        for name, call in cases:
            timings = {b: best_of(lambda: call(b), args.repeats) for b in backends}
            row = f"{name:24s} {n:5d} " + " ".join(
                f"{timings[b] * 1e3:10.2f}ms" for b in backends
            )
            if len(backends) == 2:
                row += f" {timings['python'] / timings['cython']:8.1f}x"
            print(row)

            results = [np.asarray(call(b)) for b in backends]
            for other in results[1:]:
                np.testing.assert_allclose(other, results[0], rtol=1e-10)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
