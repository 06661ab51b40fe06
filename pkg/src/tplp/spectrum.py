"""Selection of product-graph eigen-pairs minimizing transform perturbation.

The tensor product of n graphs has prod(I_i) eigenvalues, each a product of
one eigenvalue per graph.  The k pairs kept are those maximizing the filter
score alpha*|lambda| / (1 - alpha*lambda), which is exactly the set that
minimizes both the spectral and Frobenius perturbation of the propagation
operator (I - alpha*S)^{-1} over all rank-k spectral truncations.  Because
the score is monotone towards both ends of [-1, 1], the winners always live
in the union of the k algebraically largest and k smallest product values,
so a recursion that keeps a top/bottom-k window per graph finds them without
ever enumerating the full product spectrum.

Index tuples are threaded through the whole recursion: every candidate
carries one eigenvector column index per graph, so selected eigenvectors are
recovered exactly even under duplicate eigenvalues (no value lookup occurs).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, ValidationError
from .graphs import EigenSystem

# Denominator floor for 1 - alpha*lambda; unreachable for alpha < 1 and
# |lambda| <= 1 but guards against pathological inputs.
_DENOM_EPS = 1e-12

# Product spectrum sizes above this refuse to enumerate (diagnostics only).
DEFAULT_PRODUCT_CAP = 1_000_000


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def filter_scores(values: np.ndarray, alpha: float) -> np.ndarray:
    """Score alpha*|lambda| / (1 - alpha*lambda) used to rank eigenvalues."""
    values = np.asarray(values, dtype=np.float64)
    denom = np.maximum(1.0 - alpha * values, _DENOM_EPS)
    return alpha * np.abs(values) / denom


def _order_desc_lex(values: np.ndarray, tags: np.ndarray) -> np.ndarray:
    """Indices ordering by value descending, tag rows ascending on ties."""
    order = np.argsort(-values, kind="stable")
    sv = values[order]
    starts = np.flatnonzero(np.r_[True, sv[1:] != sv[:-1]])
    ends = np.r_[starts[1:], sv.size]
    lengths = ends - starts
    for i in np.flatnonzero(lengths > 1):
        block = order[starts[i]:ends[i]]
        keys = tuple(tags[block, c] for c in range(tags.shape[1] - 1, -1, -1))
        order[starts[i]:ends[i]] = block[np.lexsort(keys)]
    return order


def _window_top_bot(values: np.ndarray, tags: np.ndarray, k: int):
    """Keep the k algebraically largest and k smallest tagged values."""
    order = _order_desc_lex(values, tags)
    if values.size > 2 * k:
        order = np.concatenate([order[:k], order[-k:]])
    return values[order], tags[order]


def top_bot_2k(items, k: int):
    """Union of the k largest and k smallest values of a tagged list.

    ``items`` is a sequence of (value, tag) pairs; bare numbers are accepted
    too (tagged internally by position, returned bare).  Returns up to 2k
    entries ordered by value descending, ties broken by ascending tag.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    items = list(items)
    if not items:
        raise ValidationError("top_bot_2k requires a non-empty input")
    tagged = all(isinstance(it, (tuple, list)) and len(it) == 2 for it in items)
    if tagged:
        pairs = [(float(v), tag) for v, tag in items]
    else:
        pairs = [(float(it), pos) for pos, it in enumerate(items)]
    pairs.sort(key=lambda p: (-p[0], p[1]))
    if len(pairs) > 2 * k:
        pairs = pairs[:k] + pairs[-k:]
    return pairs if tagged else [v for v, _ in pairs]


@dataclass(frozen=True)
class ScoredCandidate:
    """One product eigenvalue with its per-graph eigenvector column indices."""

    value: float
    index_tuple: tuple[int, ...]


@dataclass(frozen=True)
class SelectedSpectrum:
    """The k selected eigen-pairs of the implicit tensor product graph.

    ``lambdas[j]`` is the j-th selected product eigenvalue, ``index_tuples[j]``
    its per-graph eigenvector column indices, and ``q_select[i]`` the I_i x k
    matrix whose column j is column ``index_tuples[j, i]`` of graph i's
    eigenvector matrix.  Rows are ordered by non-increasing filter score.
    """

    alpha: float
    lambdas: np.ndarray
    index_tuples: np.ndarray
    q_select: tuple[np.ndarray, ...]

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        tuples = np.asarray(self.index_tuples, dtype=np.int64)
        if tuples.ndim != 2 or tuples.shape[0] != lam.size:
            raise ValidationError("index_tuples must be k x n")
        qs = tuple(np.asarray(q, dtype=np.float64) for q in self.q_select)
        if len(qs) != tuples.shape[1]:
            raise ValidationError("one selected eigenvector matrix per graph required")
        for q in qs:
            if q.shape[1] != lam.size:
                raise ValidationError("q_select column counts must equal k")
        scores = filter_scores(lam, self.alpha)
        if np.any(scores[1:] > scores[:-1] + 1e-12):
            raise ValidationError("selected scores must be non-increasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "index_tuples", tuples)
        object.__setattr__(self, "q_select", qs)

    @property
    def k(self) -> int:
        return self.lambdas.size

    @property
    def n_graphs(self) -> int:
        return self.index_tuples.shape[1]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(q.shape[0] for q in self.q_select)

    def candidates(self) -> list[ScoredCandidate]:
        return [
            ScoredCandidate(float(v), tuple(int(x) for x in t))
            for v, t in zip(self.lambdas, self.index_tuples)
        ]


def select_eigenpairs(
    eigs: list[EigenSystem], alpha: float, k: int, window: int | None = None
) -> SelectedSpectrum:
    """Pick the k product eigen-pairs with the largest filter scores.

    Graphs are folded in input order; at every step only the top/bottom
    ``window`` (default k) candidates are retained, which provably contains
    a score-optimal final set.  The result is deterministic: ranking ties
    among retained candidates break towards the lexicographically smallest
    index tuple.  When many product eigenvalues tie exactly (e.g. a zero
    spectrum), equally-scoring tuples outside the retained window may be
    passed over; the attained objective is optimal regardless.

    k larger than the product spectrum size is clamped with a warning.
    """
    alpha = _check_alpha(alpha)
    if not eigs:
        raise ValidationError("at least one eigensystem is required")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    total = math.prod(int(e.size) for e in eigs)
    if k > total:
        warnings.warn(
            f"k={k} exceeds the product spectrum size {total}; clamping",
            stacklevel=2,
        )
        k = total
    win = k if window is None else int(window)
    if win < k:
        raise ValidationError("window must be at least k")

    values = eigs[0].eigenvalues.astype(np.float64, copy=True)
    tags = np.arange(eigs[0].size, dtype=np.int64)[:, None]
    for eig in eigs[1:]:
        values, tags = _window_top_bot(values, tags, win)
        lam = eig.eigenvalues
        m = values.size
        new_values = (lam[:, None] * values[None, :]).ravel()
        new_tags = np.empty((lam.size * m, tags.shape[1] + 1), dtype=np.int64)
        new_tags[:, :-1] = np.tile(tags, (lam.size, 1))
        new_tags[:, -1] = np.repeat(np.arange(lam.size, dtype=np.int64), m)
        values, tags = new_values, new_tags
    values, tags = _window_top_bot(values, tags, win)

    scores = filter_scores(values, alpha)
    order = _order_desc_lex(scores, tags)[:k]
    lambdas = values[order]
    index_tuples = tags[order]
    q_select = tuple(
        eig.eigenvectors[:, index_tuples[:, i]] for i, eig in enumerate(eigs)
    )
    return SelectedSpectrum(alpha, lambdas, index_tuples, q_select)


def filter_weights(spec: SelectedSpectrum) -> np.ndarray:
    """Diagonal filter m_j = alpha*lambda_j / (1 - alpha*lambda_j)."""
    denom = np.maximum(1.0 - spec.alpha * spec.lambdas, _DENOM_EPS)
    return spec.alpha * spec.lambdas / denom


def perturbation_norms(
    all_spectra: list[EigenSystem],
    spec: SelectedSpectrum,
    alpha: float,
    cap: int = DEFAULT_PRODUCT_CAP,
) -> tuple[float, float]:
    """Spectral and Frobenius norms of the rank-k truncation error.

    Enumerates the full product spectrum, so this is a small-instance
    diagnostic; sizes above ``cap`` are refused.
    """
    alpha = _check_alpha(alpha)
    dims = tuple(int(e.size) for e in all_spectra)
    total = math.prod(dims)
    if total > cap:
        raise CapExceededError(
            f"product spectrum size {total} exceeds cap {cap}; "
            "perturbation_norms is a small-instance diagnostic"
        )
    values = np.ones(1)
    for eig in all_spectra:
        values = (values[:, None] * eig.eigenvalues[None, :]).ravel()
    selected_flat = np.ravel_multi_index(tuple(spec.index_tuples.T), dims)
    mask = np.ones(total, dtype=bool)
    mask[selected_flat] = False
    rest = filter_scores(values[mask], alpha)
    if rest.size == 0:
        return 0.0, 0.0
    return float(rest.max()), float(np.sqrt(np.sum(rest**2)))


def save_spectrum(spec: SelectedSpectrum, path) -> None:
    """Plain-text sidecar: ``alpha <a> k <k> n <n>`` then k ``lambda idx...`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"alpha {spec.alpha:.17g} k {spec.k} n {spec.n_graphs}\n")
        for lam, row in zip(spec.lambdas, spec.index_tuples):
            idx = " ".join(str(int(x)) for x in row)
            fh.write(f"{lam:.17g} {idx}\n")


def load_spectrum(path, eigs: list[EigenSystem]) -> SelectedSpectrum:
    """Rebuild a SelectedSpectrum from its sidecar plus the eigensystems."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != "alpha" or header[2] != "k" or header[4] != "n":
            raise ValidationError(f"{path}: malformed spectrum header")
        alpha, k, n = float(header[1]), int(header[3]), int(header[5])
        if n != len(eigs):
            raise ValidationError(f"{path}: header declares {n} graphs, got {len(eigs)}")
        lambdas = np.empty(k)
        tuples = np.empty((k, n), dtype=np.int64)
        for j in range(k):
            parts = fh.readline().split()
            if len(parts) != n + 1:
                raise ValidationError(f"{path}: malformed spectrum row {j}")
            lambdas[j] = float(parts[0])
            tuples[j] = [int(p) for p in parts[1:]]
    q_select = tuple(eig.eigenvectors[:, tuples[:, i]] for i, eig in enumerate(eigs))
    return SelectedSpectrum(alpha, lambdas, tuples, q_select)
