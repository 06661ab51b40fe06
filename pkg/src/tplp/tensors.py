"""Sparse coordinate tensors, CP-form tensors, and multilinear products.

Mode convention: mode l of the tensor is graph l (input order), and whatever
contracts mode l (a vector, or a selected-eigenvector column of graph l) is
indexed the same way.  Flattening is C-order throughout, so the matching
Kronecker operator of the product graph is kron(S1, ..., Sn).  All
accumulation is double precision; compensated summation is not needed at the
target scales.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, ValidationError
from .spectrum import SelectedSpectrum

DENSE_CAP = 1_000_000


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise ValidationError(f"dims must be positive integers, got {dims}")
    return dims


@dataclass(frozen=True)
class SparseTensor:
    """n-way tensor in coordinate form: (index tuple, value) entries.

    Entries are stored sorted lexicographically by index tuple; duplicate
    tuples are rejected.
    """

    dims: tuple[int, ...]
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        idx = np.asarray(self.indices, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        if idx.ndim != 2 or idx.shape[1] != len(dims):
            idx = idx.reshape(-1, len(dims))
        if idx.shape[0] != vals.size:
            raise ValidationError("index and value counts differ")
        if idx.size:
            if idx.min() < 0 or np.any(idx >= np.asarray(dims, dtype=np.int64)):
                raise ValidationError("tensor index out of range")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("tensor values must be finite")
        order = np.lexsort(tuple(idx[:, c] for c in range(len(dims) - 1, -1, -1)))
        idx = np.ascontiguousarray(idx[order])
        vals = vals[order]
        if idx.shape[0] > 1 and np.any(np.all(idx[1:] == idx[:-1], axis=1)):
            raise ValidationError("duplicate index tuples in sparse tensor")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_entries(cls, dims, entries) -> "SparseTensor":
        entries = list(entries)
        idx = np.array([tuple(e[0]) for e in entries], dtype=np.int64).reshape(
            len(entries), len(tuple(dims))
        )
        vals = np.array([e[1] for e in entries], dtype=np.float64)
        return cls(tuple(dims), idx, vals)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def nnz(self) -> int:
        return self.values.size

    def flat_indices(self) -> np.ndarray:
        """C-order flat positions of the entries (ascending by construction)."""
        if self.nnz == 0:
            return np.empty(0, dtype=np.int64)
        return np.ravel_multi_index(tuple(self.indices.T), self.dims)

    def to_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        total = math.prod(self.dims)
        if total > cap:
            raise CapExceededError(f"dense size {total} exceeds cap {cap}")
        out = np.zeros(self.dims)
        if self.nnz:
            out[tuple(self.indices.T)] = self.values
        return out


@dataclass(frozen=True)
class CPTensor:
    """Rank-r tensor as factor matrices; entry = sum_r prod_l F[l][i_l, r]."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        fs = tuple(np.ascontiguousarray(f, dtype=np.float64) for f in self.factors)
        if not fs:
            raise ValidationError("CP tensor needs at least one factor")
        r = fs[0].shape[1] if fs[0].ndim == 2 else -1
        for f in fs:
            if f.ndim != 2 or f.shape[1] != r:
                raise ValidationError("factors must share one rank (column count)")
            if not np.all(np.isfinite(f)):
                raise ValidationError("factor entries must be finite")
        object.__setattr__(self, "factors", fs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def ndim(self) -> int:
        return len(self.factors)

    def to_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        total = math.prod(self.dims)
        if total > cap:
            raise CapExceededError(f"dense size {total} exceeds cap {cap}")
        out = np.zeros(self.dims)
        for r in range(self.rank):
            rank1 = self.factors[0][:, r]
            for f in self.factors[1:]:
                rank1 = np.multiply.outer(rank1, f[:, r])
            out += rank1
        return out

    def to_sparse(self, cap: int = DENSE_CAP) -> SparseTensor:
        """Materialize every entry as a sparse tensor (tiny instances only)."""
        dense = self.to_dense(cap=cap)
        idx = np.indices(self.dims).reshape(self.ndim, -1).T
        return SparseTensor(self.dims, idx, dense.ravel())


def _check_vectors(dims, vectors) -> list[np.ndarray]:
    if len(vectors) != len(dims):
        raise ValidationError(f"expected {len(dims)} vectors, got {len(vectors)}")
    out = []
    for l, v in enumerate(vectors):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (dims[l],):
            raise ValidationError(
                f"vector for mode {l} has shape {v.shape}, expected ({dims[l]},)"
            )
        out.append(v)
    return out


def ttv_all(t: SparseTensor, vectors) -> float:
    """Contract every mode with its vector: sum_e value_e * prod_l v_l[i_l].

    O(nnz * n) time; the vector for mode l must have length dims[l].
    """
    vecs = _check_vectors(t.dims, vectors)
    if t.nnz == 0:
        return 0.0
    prod = t.values.copy()
    for l, v in enumerate(vecs):
        prod *= v[t.indices[:, l]]
    return float(prod.sum())


def _check_spec_dims(t, spec: SelectedSpectrum) -> None:
    if t.dims != spec.dims:
        raise ValidationError(
            f"tensor dims {t.dims} do not match spectrum dims {spec.dims}"
        )


def matricized_compress(t: SparseTensor, spec: SelectedSpectrum) -> np.ndarray:
    """Mode-1-matricized compression: accumulate per-row contributions.

    Row i1 of the intermediate Z holds sum over entries with first index i1 of
    value * prod_{l>=2} q_j^{(l)}[i_l]; contracting Z against the mode-1
    eigenvector columns yields the same k-vector as per-column ttv_all, but
    the work parallelizes over rows/columns.
    """
    _check_spec_dims(t, spec)
    k = spec.k
    if t.nnz == 0:
        return np.zeros(k)
    z = np.zeros((t.dims[0], k))
    contrib = t.values[:, None] * np.ones((1, k))
    for l in range(1, t.ndim):
        contrib *= spec.q_select[l][t.indices[:, l], :]
    np.add.at(z, t.indices[:, 0], contrib)
    return np.einsum("ij,ij->j", spec.q_select[0], z)


def cp_entry(t: CPTensor, idx) -> float:
    """Evaluate one entry of a CP tensor: sum_r prod_l F[l][i_l, r]."""
    idx = tuple(int(i) for i in idx)
    if len(idx) != t.ndim:
        raise ValidationError(f"index has {len(idx)} modes, expected {t.ndim}")
    for l, i in enumerate(idx):
        if not (0 <= i < t.dims[l]):
            raise ValidationError(f"index {i} out of range for mode {l}")
    rows = t.factors[0][idx[0], :].copy()
    for l in range(1, t.ndim):
        rows *= t.factors[l][idx[l], :]
    return float(rows.sum())


def cp_entries(t: CPTensor, indices: np.ndarray) -> np.ndarray:
    """Vectorized cp_entry over an (m, n) index array."""
    indices = np.asarray(indices, dtype=np.int64)
    prod = t.factors[0][indices[:, 0], :].copy()
    for l in range(1, t.ndim):
        prod *= t.factors[l][indices[:, l], :]
    return prod.sum(axis=1)


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product of two matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValidationError("khatri_rao needs two matrices with equal column count")
    return (a[:, None, :] * b[None, :, :]).reshape(-1, a.shape[1])


def khatri_rao_gram(a, b, c, d) -> np.ndarray:
    """(A kr B)^T (C kr D) computed as (A^T C) * (B^T D) elementwise."""
    a, b, c, d = (np.asarray(x, dtype=np.float64) for x in (a, b, c, d))
    if a.shape[0] != c.shape[0] or b.shape[0] != d.shape[0]:
        raise ValidationError("khatri_rao_gram shape mismatch")
    return (a.T @ c) * (b.T @ d)


def load_sparse_tensor(path) -> SparseTensor:
    """Read ``dims I1 ... In`` then ``i1 ... in value`` lines (0-based)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if not header or header[0] != "dims":
            raise ValidationError(f"{path}: missing 'dims' header")
        dims = tuple(int(x) for x in header[1:])
        n = len(dims)
        idx_rows, vals = [], []
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != n + 1:
                raise ValidationError(f"{path}:{lineno}: expected {n} indices + value")
            idx_rows.append([int(p) for p in parts[:n]])
            vals.append(float(parts[n]))
    idx = np.array(idx_rows, dtype=np.int64).reshape(len(vals), n)
    return SparseTensor(dims, idx, np.array(vals))


def save_sparse_tensor(t: SparseTensor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dims " + " ".join(str(d) for d in t.dims) + "\n")
        for row, val in zip(t.indices, t.values):
            fh.write(" ".join(str(int(i)) for i in row) + f" {val:.17g}\n")


def load_cp_tensor(path) -> CPTensor:
    """Read ``rank r`` then per-factor blocks ``factor I_i`` + I_i rows."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "rank":
            raise ValidationError(f"{path}: missing 'rank r' header")
        r = int(header[1])
        factors = []
        line = fh.readline()
        while line:
            parts = line.split()
            if not parts:
                line = fh.readline()
                continue
            if parts[0] != "factor" or len(parts) != 2:
                raise ValidationError(f"{path}: expected 'factor I', got {line!r}")
            rows = int(parts[1])
            block = np.empty((rows, r))
            for i in range(rows):
                vals = fh.readline().split()
                if len(vals) != r:
                    raise ValidationError(f"{path}: factor row has {len(vals)} values, expected {r}")
                block[i] = [float(v) for v in vals]
            factors.append(block)
            line = fh.readline()
    if not factors:
        raise ValidationError(f"{path}: no factor blocks")
    return CPTensor(tuple(factors))


def save_cp_tensor(t: CPTensor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"rank {t.rank}\n")
        for f in t.factors:
            fh.write(f"factor {f.shape[0]}\n")
            for row in f:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
