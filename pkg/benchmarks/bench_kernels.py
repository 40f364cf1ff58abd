#!/usr/bin/env python
"""Time the numba kernels against their pure-Python fallbacks.

Both paths are called through the public wrappers with ``use_numba`` set
explicitly, so one process measures both. Outputs are checked for equality
before timing.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --rows 200 --n 1000 --repeat 5
    python benchmarks/bench_kernels.py --output bench.json
"""

import argparse
import json
import time

import numpy as np

from minorant import _kernels as K
from minorant.rng import stream


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rows, n):
    rng = stream(0, "bench")
    incr = rng.normal(size=(rows, n))
    ints = np.concatenate([np.zeros((rows, 1), np.int64), np.cumsum(rng.integers(-1, 2, size=(rows, n)), axis=1)], axis=1)
    u = rng.random((rows, n))
    path = np.concatenate([[0.0], np.cumsum(rng.normal(size=n * 10))])
    return {
        "lower_hull": lambda nb: K.lower_hull_indices(path, use_numba=nb),
        "walk_summary": lambda nb: K.walk_summary(incr, use_numba=nb),
        "int_walk_summary": lambda nb: K.int_walk_summary(ints, use_numba=nb),
        "crp_batch": lambda nb: K.crp_cycle_sizes_batch(u, use_numba=nb),
        "binomial_eta_table": lambda nb: K.binomial_eta_table(n, use_numba=nb),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=100, help="walks per batch")
    p.add_argument("--n", type=int, default=500, help="steps per walk")
    p.add_argument("--repeat", type=int, default=3, help="timing repeats (best is reported)")
    p.add_argument("--output", default=None, help="optional JSON file for the results")
    args = p.parse_args()

    if not K.NUMBA_AVAILABLE:
        raise SystemExit("numba unavailable (or MINORANT_DISABLE_NUMBA set); nothing to compare")

    results = []
    for name, fn in cases(args.rows, args.n).items():
        a, b = fn(True), fn(False)  # also compiles the numba path
        same = all(np.allclose(x, y, rtol=1e-11, atol=0) for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        t_nb = best_of(lambda: fn(True), args.repeat)
        t_py = best_of(lambda: fn(False), args.repeat)
        results.append({"kernel": name, "numba_s": t_nb, "python_s": t_py, "speedup": t_py / t_nb, "outputs_match": same})
        print(f"{name:20s} numba {t_nb * 1e3:9.2f} ms   python {t_py * 1e3:10.2f} ms   x{t_py / t_nb:7.1f}   match={same}")

    if args.output:
        with open(args.output, "w") as fh:
            json.dump({"rows": args.rows, "n": args.n, "repeat": args.repeat, "results": results}, fh, indent=2)


if __name__ == "__main__":
    main()
