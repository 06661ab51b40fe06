"""Synthetic benchmark: related graph families, diagonal-relation recovery.

A family of n graphs is derived from one random "ancestor" by rewiring a
fraction of its edges per graph, so vertex i plays the same structural role
everywhere.  Half of the diagonal tuples (i, i, ..., i) seed the initial
tensor as known relations; the other half (positives) plus an equal number
of random off-diagonal tuples (negatives) are scored after propagation and
ranked with AUC / mean average precision.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .graphs import Graph, eigendecompose, normalize
from .propagation import build_model, predict
from .tensors import SparseTensor


@dataclass(frozen=True)
class SimConfig:
    size: int = 100
    n_graphs: int = 5
    density: float = 0.1
    rewire_frac: float = 0.1
    alpha: float = 0.1
    rank: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.size < 2 or self.n_graphs < 1:
            raise ValidationError("size must be >= 2 and n_graphs >= 1")
        if not (0.0 < self.density <= 1.0):
            raise ValidationError(f"density must be in (0, 1], got {self.density}")
        if not (0.0 <= self.rewire_frac <= 1.0):
            raise ValidationError(f"rewire fraction must be in [0, 1], got {self.rewire_frac}")
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.rank < 1:
            raise ValidationError("rank must be >= 1")


@dataclass(frozen=True)
class LabeledTestSet:
    positives: np.ndarray
    negatives: np.ndarray

    @property
    def tuples(self) -> np.ndarray:
        return np.vstack([self.positives, self.negatives])

    @property
    def labels(self) -> np.ndarray:
        return np.concatenate(
            [np.ones(len(self.positives), dtype=int), np.zeros(len(self.negatives), dtype=int)]
        )


def _all_pairs(size: int) -> np.ndarray:
    iu = np.triu_indices(size, k=1)
    return np.column_stack(iu)


def generate_family(cfg: SimConfig) -> list[Graph]:
    """n graphs rewired independently from one common ancestor.

    The ancestor has exactly round(density * size*(size-1)/2) undirected
    unit-weight edges; each child rewires ceil(rewire_frac * |E|) of them
    (delete a uniformly chosen present edge, insert a uniformly chosen
    absent one), so edge count and density are preserved.
    """
    rng = np.random.default_rng(cfg.seed)
    pairs = _all_pairs(cfg.size)
    n_edges = int(round(cfg.density * pairs.shape[0]))
    if n_edges < 1:
        raise ValidationError("density too low: ancestor graph would have no edges")
    ancestor = set(map(tuple, pairs[rng.choice(pairs.shape[0], size=n_edges, replace=False)]))

    graphs = []
    child_rngs = rng.spawn(cfg.n_graphs)
    n_rewire = int(np.ceil(cfg.rewire_frac * n_edges))
    for child in child_rngs:
        edges = set(ancestor)
        for _ in range(n_rewire):
            present = sorted(edges)
            drop = present[child.integers(len(present))]
            edges.discard(drop)
            while True:
                a, b = child.integers(cfg.size, size=2)
                if a == b:
                    continue
                cand = (min(int(a), int(b)), max(int(a), int(b)))
                if cand not in edges:
                    edges.add(cand)
                    break
        graphs.append(Graph.from_edges(cfg.size, [(a, b, 1.0) for a, b in sorted(edges)]))
    return graphs


def build_sim_input(cfg: SimConfig) -> tuple[SparseTensor, LabeledTestSet]:
    """Initial tensor plus held-out test set.

    Half of the diagonal tuples get value 1 (training); the remaining half
    are positives and an equal number of distinct random off-diagonal tuples
    are negatives, all present in the initial tensor at value 0.9.
    """
    rng = np.random.default_rng(cfg.seed + 1)
    size, n = cfg.size, cfg.n_graphs
    dims = (size,) * n
    perm = rng.permutation(size)
    half = size // 2
    train_ids, pos_ids = perm[:half], perm[half: 2 * half]

    taken = {tuple([int(i)] * n) for i in range(size)}
    negatives = []
    while len(negatives) < half:
        tup = tuple(int(x) for x in rng.integers(size, size=n))
        if tup in taken:
            continue
        taken.add(tup)
        negatives.append(tup)

    entries = [(tuple([int(i)] * n), 1.0) for i in train_ids]
    entries += [(tuple([int(i)] * n), 0.9) for i in pos_ids]
    entries += [(tup, 0.9) for tup in negatives]
    y0 = SparseTensor.from_entries(dims, entries)
    test = LabeledTestSet(
        positives=np.array([[int(i)] * n for i in pos_ids], dtype=np.int64),
        negatives=np.array(negatives, dtype=np.int64),
    )
    return y0, test


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative; ties 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise ValidationError("auc needs at least one positive and one negative")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (pos.size * neg.size))


def mean_avg_precision(scores, labels) -> float:
    """Mean of precision-at-rank over the positive positions.

    Ranking is by score descending; ties keep stable input order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if not np.any(labels == 1):
        raise ValidationError("mean_avg_precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    ranked = labels[order]
    hits = np.flatnonzero(ranked == 1)
    precisions = (np.arange(hits.size) + 1.0) / (hits + 1.0)
    return float(precisions.mean())


def run_simulation(cfg: SimConfig, num_threads: int = 0) -> dict:
    """Generate, propagate, and evaluate one simulation; returns metrics."""
    t0 = time.perf_counter()
    graphs = generate_family(cfg)
    y0, test = build_sim_input(cfg)
    eigs = [eigendecompose(normalize(g)) for g in graphs]
    model = build_model(eigs, y0, cfg.alpha, cfg.rank, num_threads=num_threads)
    table = predict(model, test.tuples, num_threads=num_threads)
    by_tuple = {tup: s for tup, s in table}
    scores = np.array([by_tuple[tuple(int(i) for i in row)] for row in test.tuples])
    elapsed = time.perf_counter() - t0
    return {
        "auc": auc(scores, test.labels),
        "map": mean_avg_precision(scores, test.labels),
        "seconds": elapsed,
    }
