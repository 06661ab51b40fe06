"""Command-line interface: ``run``, ``simulate``, ``oracle-check``.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical error.
Output files are written via a temp file + atomic rename, so failures never
leave partial results behind.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
import time
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import NumericalError, ValidationError
from .graphs import eigendecompose, load_graph, normalize
from .oracle import best_rank_k_transform, exact_closed_form, transform_matrix
from .pairwise import cp_from_pairwise, load_pairwise
from .propagation import build_model, predict
from .simulate import SimConfig, run_simulation
from .spectrum import filter_scores, perturbation_norms, select_eigenpairs
from .tensors import load_sparse_tensor

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("tplp")


def _atomic_write(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tplp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_queries(path: str, n: int) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != n:
                raise ValidationError(f"{path}:{lineno}: expected {n} indices")
            rows.append([int(p) for p in parts])
    return np.array(rows, dtype=np.int64).reshape(len(rows), n)


def _check_alpha_rank(alpha: float, rank: int) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"--alpha must lie in (0, 1), got {alpha}")
    if rank < 1:
        raise ValidationError(f"--rank must be >= 1, got {rank}")


def _timed(label: str, fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    log.info("%s: %.3fs", label, time.perf_counter() - t0)
    return out


def cmd_run(args) -> int:
    _check_alpha_rank(args.alpha, args.rank)
    if bool(args.tensor) == bool(args.pairwise):
        raise ValidationError("exactly one of --tensor or --pairwise is required")
    if args.pairwise and args.cp_rank < 1:
        raise ValidationError("--cp-rank must be >= 1 with --pairwise")

    graphs = _timed("load graphs", lambda: [load_graph(p) for p in args.graphs])
    sizes = [g.size for g in graphs]
    eigs = _timed(
        "normalize + eigendecompose",
        lambda: [eigendecompose(normalize(g)) for g in graphs],
    )
    if args.tensor:
        y0 = load_sparse_tensor(args.tensor)
        if y0.dims != tuple(sizes):
            raise ValidationError(
                f"tensor dims {y0.dims} do not match graph sizes {tuple(sizes)}"
            )
    else:
        pairwise = load_pairwise(args.pairwise)
        y0 = _timed(
            "pairwise symNMF",
            lambda: cp_from_pairwise(pairwise, sizes, args.cp_rank, seed=args.seed),
        )
    model = _timed(
        "build model", lambda: build_model(eigs, y0, args.alpha, args.rank, args.threads)
    )
    queries = _load_queries(args.queries, len(graphs))
    table = _timed("score queries", lambda: predict(model, queries, args.threads))
    _atomic_write(args.out, table.to_tsv())
    log.info("wrote %d rows to %s", len(table), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    ranks = args.sweep_k if args.sweep_k else [args.rank]
    csv_rows = ["size,n_graphs,density,rewire,alpha,rank,seed,auc,map,seconds"]
    for rank in ranks:
        cfg = SimConfig(
            size=args.size,
            n_graphs=args.num_graphs,
            density=args.density,
            rewire_frac=args.rewire,
            alpha=args.alpha,
            rank=rank,
            seed=args.seed,
        )
        metrics = run_simulation(cfg, num_threads=args.threads)
        for key in ("size", "n_graphs", "density", "rewire_frac", "alpha", "rank", "seed"):
            print(f"{key}={getattr(cfg, key)}")
        print(f"auc={metrics['auc']:.6f}")
        print(f"map={metrics['map']:.6f}")
        print(f"seconds={metrics['seconds']:.3f}")
        csv_rows.append(
            f"{cfg.size},{cfg.n_graphs},{cfg.density},{cfg.rewire_frac},"
            f"{cfg.alpha},{rank},{cfg.seed},{metrics['auc']:.6f},"
            f"{metrics['map']:.6f},{metrics['seconds']:.3f}"
        )
    if args.csv:
        _atomic_write(args.csv, "\n".join(csv_rows) + "\n")
    return EXIT_OK


def _brute_force_best_frobenius(eigs, alpha: float, k: int) -> float:
    """Minimum Frobenius perturbation over all k-subsets of the product spectrum."""
    values = np.ones(1)
    for e in eigs:
        values = (values[:, None] * e.eigenvalues[None, :]).ravel()
    sq = filter_scores(values, alpha) ** 2
    total = sq.sum()
    best = math.inf
    for subset in combinations(range(values.size), k):
        best = min(best, total - sq[list(subset)].sum())
    return math.sqrt(max(best, 0.0))


def cmd_oracle_check(args) -> int:
    _check_alpha_rank(args.alpha, args.rank)
    graphs = [load_graph(p) for p in args.graphs]
    normed = [normalize(g) for g in graphs]
    eigs = [eigendecompose(s) for s in normed]
    dims = tuple(g.size for g in graphs)
    total = math.prod(dims)
    k = min(args.rank, total)
    rng = np.random.default_rng(args.seed)
    failures = 0

    # Full-rank model must reproduce the dense closed form exactly.
    y0_dense = rng.random(dims)
    idx = np.indices(dims).reshape(len(dims), -1).T
    from .tensors import SparseTensor

    y0 = SparseTensor(dims, idx, y0_dense.ravel())
    exact = exact_closed_form(normed, y0_dense, args.alpha)
    model = build_model(eigs, y0, args.alpha, total, num_threads=args.threads)
    table = predict(model, idx, num_threads=args.threads)
    approx = np.empty(total)
    for row, s in table:
        approx[np.ravel_multi_index(row, dims)] = s
    dev = np.abs(approx - exact.ravel()).max()
    ok = dev <= 1e-8
    failures += 0 if ok else 1
    print(f"full-rank equivalence: {'PASS' if ok else 'FAIL'} (max deviation {dev:.3e})")

    # Selected truncation must beat the best rank-k approximation of A.
    spec = select_eigenpairs(eigs, args.alpha, k)
    s2, sf = perturbation_norms(eigs, spec, args.alpha)
    a = transform_matrix(normed, args.alpha)
    a_k = best_rank_k_transform(normed, args.alpha, k)
    bk2 = np.linalg.norm(a_k - a, 2)
    bkf = np.linalg.norm(a_k - a, "fro")
    ok = s2 < bk2 and sf < bkf
    failures += 0 if ok else 1
    print(
        f"truncation-vs-best-rank-k: {'PASS' if ok else 'FAIL'} "
        f"(spectral {s2:.3e} < {bk2:.3e}, frobenius {sf:.3e} < {bkf:.3e})"
    )

    # Selection must attain the exhaustive-search optimum (when enumerable).
    if math.comb(total, k) <= args.subset_cap:
        best = _brute_force_best_frobenius(eigs, args.alpha, k)
        ok = sf <= best + 1e-9 * max(best, 1.0)
        failures += 0 if ok else 1
        print(
            f"selection optimality: {'PASS' if ok else 'FAIL'} "
            f"(frobenius {sf:.6e} vs exhaustive {best:.6e})"
        )
    else:
        print(
            f"selection optimality: SKIP (C({total},{k}) subsets exceed cap {args.subset_cap})"
        )
    if failures:
        raise NumericalError(f"{failures} oracle check(s) failed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tplp",
        description="Low-rank label propagation on the tensor product of graphs",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage timings")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="score queried multi-relations")
    run_p.add_argument("--graphs", nargs="+", required=True, help="graph edge-list files, in order")
    run_p.add_argument("--tensor", help="sparse initial tensor file")
    run_p.add_argument("--pairwise", nargs="+", help="pairwise similarity files")
    run_p.add_argument("--cp-rank", type=int, default=0, help="CP rank for --pairwise input")
    run_p.add_argument("--alpha", type=float, default=0.1)
    run_p.add_argument("--rank", type=int, required=True, help="number of eigen-pairs k")
    run_p.add_argument("--queries", required=True, help="file of query tuples")
    run_p.add_argument("--out", required=True, help="output TSV path")
    run_p.add_argument("--threads", type=int, default=0, help="0 = auto")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.set_defaults(func=cmd_run)

    sim_p = sub.add_parser("simulate", help="synthetic benchmark with AUC/MAP metrics")
    sim_p.add_argument("--size", type=int, default=100)
    sim_p.add_argument("--num-graphs", type=int, default=5)
    sim_p.add_argument("--density", type=float, default=0.1)
    sim_p.add_argument("--rewire", type=float, default=0.1)
    sim_p.add_argument("--alpha", type=float, default=0.1)
    sim_p.add_argument("--rank", type=int, default=1000)
    sim_p.add_argument("--sweep-k", type=int, nargs="+", help="run once per rank value")
    sim_p.add_argument("--csv", help="also write metrics as CSV")
    sim_p.add_argument("--threads", type=int, default=0)
    sim_p.add_argument("--seed", type=int, default=0)
    sim_p.set_defaults(func=cmd_simulate)

    orc_p = sub.add_parser("oracle-check", help="dense-oracle consistency checks (tiny instances)")
    orc_p.add_argument("--graphs", nargs="+", required=True)
    orc_p.add_argument("--alpha", type=float, default=0.5)
    orc_p.add_argument("--rank", type=int, required=True)
    orc_p.add_argument("--threads", type=int, default=0)
    orc_p.add_argument("--seed", type=int, default=0)
    orc_p.add_argument(
        "--subset-cap",
        type=int,
        default=200_000,
        help="skip the exhaustive selection check above this many subsets",
    )
    orc_p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s %(message)s",
        stream=sys.stderr,
    )
    log.info("kernel backend: %s", _kernels.BACKEND)
    try:
        return args.func(args)
    except ValueError as exc:
        # ValidationError and malformed numeric text in input files both land here.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
