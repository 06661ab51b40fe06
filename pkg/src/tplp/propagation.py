"""Low-rank label propagation pipeline: compress, filter, expand, query.

The closed-form propagation operator (1-alpha)(I - alpha*S)^{-1} on the
product graph is approximated through its k selected eigen-pairs:

    score(i1..in) = (1-alpha) * (sum_j vhat_j * prod_l Q_l[i_l, j] + Y0[i1..in])

where v compresses the initial tensor onto the selected eigenvectors and
vhat applies the diagonal spectral filter.  Each query costs O(n*k).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .errors import ValidationError
from .graphs import EigenSystem
from .spectrum import SelectedSpectrum, filter_weights, select_eigenpairs
from .tensors import CPTensor, SparseTensor, cp_entries

InitialTensor = Union[SparseTensor, CPTensor]


def compress(y0: InitialTensor, spec: SelectedSpectrum, num_threads: int = 0) -> np.ndarray:
    """Project the initial tensor onto the k selected product eigenvectors.

    Sparse input costs O(nnz * n * k); CP input costs O(k * r * sum I_i) via
    the Hadamard product of the per-graph Gram blocks.
    """
    if spec.k == 0:
        raise ValidationError("empty spectrum")
    if y0.dims != spec.dims:
        raise ValidationError(f"tensor dims {y0.dims} do not match spectrum dims {spec.dims}")
    if isinstance(y0, SparseTensor):
        qcat, offsets = _kernels.pack_factors(spec.q_select)
        return _kernels.compress_sparse(y0.indices, y0.values, qcat, offsets, num_threads)
    prod = spec.q_select[0].T @ y0.factors[0]
    for l in range(1, y0.ndim):
        prod *= spec.q_select[l].T @ y0.factors[l]
    return prod.sum(axis=1)


@dataclass(frozen=True)
class PropagationModel:
    """Everything needed to score any entry in O(n*k).

    ``v`` is the compressed initial tensor, ``v_hat`` its filtered form
    (v_hat = m * v with the diagonal filter weights m).
    """

    alpha: float
    spectrum: SelectedSpectrum
    v: np.ndarray
    v_hat: np.ndarray
    y0: InitialTensor

    def __post_init__(self):
        if not (self.v.shape == self.v_hat.shape == (self.spectrum.k,)):
            raise ValidationError("v / v_hat length must equal spectrum k")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.spectrum.dims


def build_model(
    eigensystems: list[EigenSystem],
    y0: InitialTensor,
    alpha: float,
    k: int,
    num_threads: int = 0,
) -> PropagationModel:
    """Select the spectrum, compress the initial tensor, apply the filter."""
    spec = select_eigenpairs(eigensystems, alpha, k)
    v = compress(y0, spec, num_threads=num_threads)
    v_hat = filter_weights(spec) * v
    return PropagationModel(spec.alpha, spec, v, v_hat, y0)


def _y0_batch(y0: InitialTensor, idx: np.ndarray) -> np.ndarray:
    """Initial-tensor values at the given index rows (0 for absent sparse entries)."""
    if isinstance(y0, CPTensor):
        return cp_entries(y0, idx)
    out = np.zeros(idx.shape[0])
    if y0.nnz == 0:
        return out
    flat_known = y0.flat_indices()
    flat_query = np.ravel_multi_index(tuple(idx.T), y0.dims)
    pos = np.searchsorted(flat_known, flat_query)
    pos = np.minimum(pos, flat_known.size - 1)
    hit = flat_known[pos] == flat_query
    out[hit] = y0.values[pos[hit]]
    return out


def _check_query_indices(dims, idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim == 1:
        idx = idx.reshape(1, -1)
    if idx.shape[1] != len(dims):
        raise ValidationError(f"query tuples must have {len(dims)} indices")
    if idx.size and (idx.min() < 0 or np.any(idx >= np.asarray(dims, dtype=np.int64))):
        raise ValidationError("query index out of range")
    return idx


def score(model: PropagationModel, idx) -> float:
    """Score one n-tuple in O(n*k)."""
    idx = _check_query_indices(model.dims, idx)
    prod = model.v_hat.copy()
    for l, q in enumerate(model.spectrum.q_select):
        prod *= q[idx[0, l], :]
    return float((1.0 - model.alpha) * (prod.sum() + _y0_batch(model.y0, idx)[0]))


@dataclass(frozen=True)
class ScoreTable:
    """Scored multi-relations, sorted by score descending then tuple order."""

    indices: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return self.scores.size

    def __iter__(self):
        for row, s in zip(self.indices, self.scores):
            yield tuple(int(i) for i in row), float(s)

    def to_tsv(self) -> str:
        lines = [
            "\t".join(str(int(i)) for i in row) + f"\t{s:.12g}"
            for row, s in zip(self.indices, self.scores)
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_tsv())


def predict(model: PropagationModel, queries, num_threads: int = 0) -> ScoreTable:
    """Score a set of queried tuples; duplicates are collapsed.

    Output rows are sorted by score descending, ties by ascending index
    tuple, so results are deterministic and thread-count independent.
    """
    idx = np.asarray(list(queries) if not isinstance(queries, np.ndarray) else queries,
                     dtype=np.int64)
    if idx.size == 0:
        n = len(model.dims)
        return ScoreTable(np.empty((0, n), dtype=np.int64), np.empty(0))
    idx = _check_query_indices(model.dims, idx)
    idx = np.unique(idx, axis=0)
    qcat, offsets = _kernels.pack_factors(model.spectrum.q_select)
    expanded = _kernels.score_entries(idx, model.v_hat, qcat, offsets, num_threads)
    scores = (1.0 - model.alpha) * (expanded + _y0_batch(model.y0, idx))
    order = np.argsort(-scores, kind="stable")
    return ScoreTable(idx[order], scores[order])
