"""Initial tensors from cross-graph pairwise similarities via symmetric NMF.

The pairwise matrices are stacked into one symmetric block matrix, factored
as F F^T with F >= 0, and F's row blocks (one per graph, in graph order)
become the CP factors of the rank-r initial tensor.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .tensors import CPTensor

_EPS = 1e-12


def stack_pairwise(pairwise: dict, sizes) -> np.ndarray:
    """Assemble the symmetric block matrix of cross-graph similarities.

    ``pairwise`` maps an unordered graph pair (i, j), i != j, to a
    nonnegative I_i x I_j matrix (either key orientation accepted).  Missing
    pairs become zero blocks; diagonal blocks are zero, so only cross-graph
    evidence seeds relations.
    """
    sizes = [int(s) for s in sizes]
    n = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    out = np.zeros((total, total))
    for (i, j), block in pairwise.items():
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValidationError(f"invalid graph pair ({i}, {j})")
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (sizes[i], sizes[j]):
            raise ValidationError(
                f"pair ({i},{j}) block has shape {block.shape}, "
                f"expected ({sizes[i]}, {sizes[j]})"
            )
        if block.min(initial=0.0) < 0.0:
            raise ValidationError(f"pair ({i},{j}) has negative entries")
        ri, rj = slice(offsets[i], offsets[i + 1]), slice(offsets[j], offsets[j + 1])
        if np.any(out[ri, rj]):
            raise ValidationError(f"pair ({i},{j}) given twice")
        out[ri, rj] = block
        out[rj, ri] = block.T
    return out


def symnmf(
    m: np.ndarray,
    r: int,
    max_iters: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
    beta: float = 0.5,
    return_objectives: bool = False,
):
    """Nonnegative F locally minimizing ||M - F F^T||_F, multiplicative updates.

    Uses the damped rule F <- F * (1 - beta + beta * (M F) / (F F^T F)),
    which keeps the objective non-increasing (the undamped beta=1 rule
    oscillates).  Initialization is uniform(0, 1) scaled by sqrt(mean(M)/r)
    under the given seed; iteration stops when the relative objective change
    drops below ``tol`` or after ``max_iters`` updates.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("symnmf needs a square matrix")
    if np.abs(m - m.T).max(initial=0.0) > 1e-12 * max(np.abs(m).max(initial=0.0), 1.0):
        raise ValidationError("symnmf needs a symmetric matrix")
    if m.min(initial=0.0) < 0.0:
        raise ValidationError("symnmf needs a nonnegative matrix")
    if not (1 <= r <= m.shape[0]):
        raise ValidationError(f"rank must be in [1, {m.shape[0]}], got {r}")
    if not (0.0 < beta <= 1.0):
        raise ValidationError(f"beta must be in (0, 1], got {beta}")

    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(m.mean(), _EPS) / r)
    f = rng.uniform(0.0, 1.0, size=(m.shape[0], r)) * scale

    objectives = [float(np.linalg.norm(m - f @ f.T))]
    for _ in range(max_iters):
        numer = m @ f
        denom = f @ (f.T @ f) + _EPS
        f = f * (1.0 - beta + beta * numer / denom)
        obj = float(np.linalg.norm(m - f @ f.T))
        prev = objectives[-1]
        objectives.append(obj)
        if prev > 0.0 and abs(prev - obj) / prev < tol:
            break
    if return_objectives:
        return f, objectives
    return f


def split_factors(f: np.ndarray, sizes) -> CPTensor:
    """Cut F into row blocks (graph order) and wrap them as CP factors."""
    f = np.asarray(f, dtype=np.float64)
    sizes = [int(s) for s in sizes]
    if f.shape[0] != sum(sizes):
        raise ValidationError(
            f"factor has {f.shape[0]} rows, expected sum(sizes) = {sum(sizes)}"
        )
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    return CPTensor(tuple(f[bounds[i]:bounds[i + 1]] for i in range(len(sizes))))


def cp_from_pairwise(
    pairwise: dict, sizes, r: int, max_iters: int = 500, tol: float = 1e-6, seed: int = 0
) -> CPTensor:
    """stack_pairwise + symnmf + split_factors in one step."""
    stacked = stack_pairwise(pairwise, sizes)
    f = symnmf(stacked, r, max_iters=max_iters, tol=tol, seed=seed)
    return split_factors(f, sizes)


def load_pairwise(paths) -> dict:
    """Read pairwise matrix files into a {(i, j): matrix} dict.

    Format per file: header ``pair i j``, then either ``dense I_i I_j``
    followed by I_i whitespace-separated rows, or ``coo I_i I_j nnz``
    followed by nnz ``row col value`` triples.
    """
    out = {}
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 3 or header[0] != "pair":
                raise ValidationError(f"{path}: missing 'pair i j' header")
            i, j = int(header[1]), int(header[2])
            kind = fh.readline().split()
            if len(kind) < 3 or kind[0] not in ("dense", "coo"):
                raise ValidationError(f"{path}: expected 'dense I J' or 'coo I J nnz'")
            rows, cols = int(kind[1]), int(kind[2])
            block = np.zeros((rows, cols))
            if kind[0] == "dense":
                for a in range(rows):
                    vals = fh.readline().split()
                    if len(vals) != cols:
                        raise ValidationError(f"{path}: dense row {a} has {len(vals)} values")
                    block[a] = [float(v) for v in vals]
            else:
                if len(kind) != 4:
                    raise ValidationError(f"{path}: coo header needs nnz")
                for _ in range(int(kind[3])):
                    a, b, v = fh.readline().split()
                    block[int(a), int(b)] = float(v)
        if (i, j) in out or (j, i) in out:
            raise ValidationError(f"pair ({i},{j}) appears in multiple files")
        out[(i, j)] = block
    return out
