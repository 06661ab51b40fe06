"""Compare the compiled and numpy kernel backends on the two hot loops.

Usage: python3 benchmarks/bench_kernels.py [--quick]

Times sparse-tensor compression (nnz x n x k products) and batch entry
scoring (m x n x k) at a few desk-scale sizes, printing one row per case
with the speedup of the compiled extension over the numpy fallback.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from tplp._kernels import _numpy, pack_factors

try:
    from tplp._kernels import _core
except ImportError:
    _core = None


def best_time(fn, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_case(dims, nnz, k, seed=0):
    rng = np.random.default_rng(seed)
    idx = np.ascontiguousarray(
        np.column_stack([rng.integers(n, size=nnz) for n in dims]), dtype=np.int64
    )
    vals = rng.random(nnz)
    qcat, offsets = pack_factors([rng.standard_normal((n, k)) for n in dims])
    weights = rng.standard_normal(k)
    return idx, vals, weights, qcat, offsets


def run(cases, repeats):
    header = f"{'case':<34} {'numpy':>10} {'compiled':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for dims, nnz, k in cases:
        idx, vals, weights, qcat, offsets = make_case(dims, nnz, k)
        for name, ref_fn, fast_fn in (
            (
                "compress",
                lambda: _numpy.compress_sparse(idx, vals, qcat, offsets),
                (lambda: _core.compress_sparse(idx, vals, qcat, offsets, 0))
                if _core
                else None,
            ),
            (
                "score",
                lambda: _numpy.score_entries(idx, weights, qcat, offsets),
                (lambda: _core.score_entries(idx, weights, qcat, offsets, 0))
                if _core
                else None,
            ),
        ):
            label = f"{name} n={len(dims)} nnz={nnz} k={k}"
            t_ref = best_time(ref_fn, repeats)
            if fast_fn is None:
                print(f"{label:<34} {t_ref * 1e3:9.2f}ms {'-':>10} {'-':>9}")
                continue
            t_fast = best_time(fast_fn, repeats)
            np.testing.assert_allclose(fast_fn(), ref_fn(), rtol=1e-12, atol=1e-12)
            print(
                f"{label:<34} {t_ref * 1e3:9.2f}ms {t_fast * 1e3:9.2f}ms "
                f"{t_ref / t_fast:8.1f}x"
            )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="small sizes, 2 repeats")
    args = parser.parse_args()
    if _core is None:
        print("compiled backend not built; timing numpy fallback only")
    if args.quick:
        cases = [((100,) * 3, 2_000, 500), ((100,) * 5, 2_000, 500)]
        repeats = 2
    else:
        cases = [
            ((100,) * 3, 10_000, 1000),
            ((100,) * 5, 10_000, 1000),
            ((100,) * 5, 50_000, 1000),
            ((100,) * 5, 10_000, 5000),
            ((1000,) * 4, 20_000, 2000),
        ]
        repeats = 5
    run(cases, repeats)


if __name__ == "__main__":
    main()
