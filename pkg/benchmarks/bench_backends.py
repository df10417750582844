#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the three hot paths (single-point energy, weighted moment matrix,
full field evaluation) on synthetic circle data at several sizes and
prints a per-kernel speedup table.  The first compiled call is warmed up
separately so JIT time is reported, not mixed into the averages.

    python3 benchmarks/bench_backends.py [--sizes 1000,10000,100000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from varifolds import _kernels_numpy
from varifolds.atomic import sample_circle

try:
    from varifolds import _kernels_numba
except ImportError:  # pragma: no cover
    _kernels_numba = None


def _timeit(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeats: int) -> None:
    backends = [("numpy", _kernels_numpy)]
    if _kernels_numba is not None:
        backends.append(("numba", _kernels_numba))
    else:
        print("numba unavailable; timing the numpy backend only")

    print(f"{'kernel':<16} {'N':>8} " + " ".join(f"{name:>12}" for name, _ in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for count in sizes:
        v = sample_circle((0.0, 0.0), 1.0, count)
        center = np.array([1.0, 0.0])
        basis = np.array([[0.0, 1.0]])
        field_k = min(count, 2000)
        cases = {
            "energy_value": lambda k: k.energy_value(v.points, v.masses, basis, center,
                                                     1, 0.05, 1.0),
            "weighted_moment": lambda k: k.weighted_moment(v.points, v.masses, center,
                                                           1, 0.05, 1.0),
            "field_energies": lambda k: k.field_energies(v.points[:field_k],
                                                         v.bases[:field_k],
                                                         v.points, v.masses, 1, 0.05, 1.0),
        }
        for label, call in cases.items():
            times = []
            for name, mod in backends:
                if name == "numba":
                    t0 = time.perf_counter()
                    call(mod)  # warmup: JIT compile (cached across runs)
                    warm = time.perf_counter() - t0
                    _ = warm
                times.append(_timeit(lambda m=mod: call(m), repeats))
            row = f"{label:<16} {count:>8} " + " ".join(f"{t * 1e3:>10.3f}ms" for t in times)
            if len(times) == 2:
                row += f"   {times[0] / times[1]:>6.1f}x"
            print(row)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    bench(sizes, args.repeats)


if __name__ == "__main__":
    main()
