"""Benchmark the GF(2) reduction backends against each other.

Runs the filtration reduction (the persistence/spanning hot loop) on uniform
random complexes at a few representative sizes, once per available backend
(numba JIT and the pure-numpy fallback), and prints a timing table.

    python3 benchmarks/bench_reduction.py [--trials 3] [--heavy]

Setting ACYCLEKIT_PURE_NUMPY=1 would hide the numba backend entirely, so run
this script without it to see the comparison.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from acyclekit._kernels import available_backends, get_backend
from acyclekit.complexes import complete_skeleton, WeightedFiltration


def _filtration(n: int, d: int, seed: int) -> tuple:
    K = complete_skeleton(n, d)
    rng = np.random.Generator(np.random.Philox(seed))
    weights = {f: 0.0 for k in range(d) for f in K.faces(k)}
    for f, w in zip(K.faces(d), rng.random(K.f(d))):
        weights[f] = float(w)
    wf = WeightedFiltration(K, weights, validate=False)
    return wf.facet_rank_rows(d), K.f(d - 1), math.comb(n - 1, d)


def _time_case(backend, rows, n_rows, cap, trials: int) -> tuple[float, float]:
    full = math.inf
    capped = math.inf
    for _ in range(trials):
        t0 = time.perf_counter()
        backend.reduce_filtration(rows, n_rows, -1)
        full = min(full, time.perf_counter() - t0)
        t0 = time.perf_counter()
        backend.reduce_filtration(rows, n_rows, cap)
        capped = min(capped, time.perf_counter() - t0)
    return full, capped


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=3, help="timed repetitions per case")
    parser.add_argument("--heavy", action="store_true", help="include the largest case")
    args = parser.parse_args()

    cases = [(60, 1, 101), (120, 1, 102), (30, 2, 103), (45, 2, 104)]
    if args.heavy:
        cases += [(200, 1, 105), (60, 2, 106), (25, 3, 107)]

    print(f"backends: {', '.join(available_backends())}")
    header = f"{'case':>14} {'cols':>7} {'backend':>8} {'full (s)':>10} {'early-stop (s)':>15}"
    print(header)
    print("-" * len(header))
    for n, d, seed in cases:
        rows, n_rows, cap = _filtration(n, d, seed)
        for name in available_backends():
            backend = get_backend(name)
            backend.reduce_filtration(rows[:64], n_rows, -1)  # warm the JIT
            full, capped = _time_case(backend, rows, n_rows, cap, args.trials)
            print(
                f"{f'n={n} d={d}':>14} {rows.shape[0]:>7} {name:>8} "
                f"{full:>10.4f} {capped:>15.4f}"
            )
        base = get_backend("numpy")
        if "numba" in available_backends():
            fast = get_backend("numba")
            f_np, _ = _time_case(base, rows, n_rows, cap, 1)
            f_nb, _ = _time_case(fast, rows, n_rows, cap, 1)
            print(f"{'':>14} {'':>7} {'speedup':>8} {f_np / f_nb:>10.1f}x")


if __name__ == "__main__":
    main()
