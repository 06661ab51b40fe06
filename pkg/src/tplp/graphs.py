"""Knowledge graphs: loading, validation, normalization, eigendecomposition.

A graph is a symmetric nonnegative weighted adjacency matrix.  Normalization
produces S = D^{-1/2} W D^{-1/2} (degree = row sum), whose spectrum lies in
[-1, 1]; zero-degree vertices get zero rows/columns and stay inert.  A full
symmetric eigendecomposition of S is computed per graph, since the spectral
selection needs candidates from both ends of every spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# |W - W^T| tolerated relative to max|W| before input counts as asymmetric.
_SYM_RTOL = 1e-12


def _as_square_array(w, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError(f"{name} contains non-finite entries")
    return w


def _check_symmetric(w: np.ndarray, name: str) -> None:
    scale = np.abs(w).max() if w.size else 0.0
    if np.abs(w - w.T).max(initial=0.0) > _SYM_RTOL * max(scale, 1.0):
        raise ValidationError(f"{name} is not symmetric")


@dataclass(frozen=True)
class Graph:
    """Symmetric nonnegative weighted adjacency of one knowledge graph."""

    weights: np.ndarray

    def __post_init__(self):
        w = _as_square_array(self.weights, "adjacency")
        if w.min(initial=0.0) < 0.0:
            raise ValidationError("adjacency has negative weights")
        _check_symmetric(w, "adjacency")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n_nodes: int, edges) -> "Graph":
        """Build a graph from (row, col, weight) triples with symmetric closure.

        Listing both orientations of an edge is allowed only if the weights
        agree; conflicting duplicates raise ValidationError.
        """
        if n_nodes <= 0:
            raise ValidationError("graph size must be positive")
        w = np.zeros((n_nodes, n_nodes))
        seen: dict[tuple[int, int], float] = {}
        for r, c, val in edges:
            r, c, val = int(r), int(c), float(val)
            if not (0 <= r < n_nodes and 0 <= c < n_nodes):
                raise ValidationError(f"edge ({r},{c}) out of range for size {n_nodes}")
            if val < 0.0:
                raise ValidationError(f"edge ({r},{c}) has negative weight {val}")
            key = (min(r, c), max(r, c))
            if key in seen and seen[key] != val:
                raise ValidationError(f"conflicting weights for edge {key}")
            seen[key] = val
            w[r, c] = val
            w[c, r] = val
        return cls(w)


@dataclass(frozen=True)
class NormalizedGraph:
    """Symmetrically normalized adjacency; spectrum contained in [-1, 1]."""

    matrix: np.ndarray

    def __post_init__(self):
        s = _as_square_array(self.matrix, "normalized adjacency")
        _check_symmetric(s, "normalized adjacency")
        object.__setattr__(self, "matrix", s)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """All eigen-pairs of one normalized graph.

    ``eigenvalues[j]`` pairs with eigenvector column ``eigenvectors[:, j]``;
    columns are orthonormal and follow a deterministic sign convention (first
    non-negligible coordinate positive).  Correctness of downstream scoring
    must not depend on the sign choice.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        q = np.asarray(self.eigenvectors, dtype=np.float64)
        if lam.ndim != 1 or q.ndim != 2 or q.shape != (lam.size, lam.size):
            raise ValidationError("eigensystem shapes are inconsistent")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", q)

    @property
    def size(self) -> int:
        return self.eigenvalues.size


def normalize(g: Graph) -> NormalizedGraph:
    """Symmetric normalization S = D^{-1/2} W D^{-1/2}.

    Zero-degree vertices map to all-zero rows/columns (their D^{-1/2} entry
    is defined as 0), which keeps S well defined and such vertices inert.
    """
    w = g.weights
    deg = w.sum(axis=1)
    with np.errstate(divide="ignore"):
        dinv = np.where(deg > 0.0, 1.0 / np.sqrt(deg), 0.0)
    s = dinv[:, None] * w * dinv[None, :]
    return NormalizedGraph(s)


def _fix_column_signs(q: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first non-negligible entry is positive."""
    q = q.copy()
    for j in range(q.shape[1]):
        col = q[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))
        if nz.size and col[nz[0]] < 0.0:
            q[:, j] = -col
    return q


def eigendecompose(s: NormalizedGraph, reconstruction_tol: float = 1e-8) -> EigenSystem:
    """Full symmetric eigendecomposition of a normalized graph.

    Raises NumericalError if the eigensolver fails to converge or the
    reconstruction Q diag(lambda) Q^T deviates from S by more than
    ``reconstruction_tol`` in relative Frobenius norm.
    """
    try:
        lam, q = np.linalg.eigh(s.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    q = _fix_column_signs(q)
    recon = (q * lam[None, :]) @ q.T
    scale = max(np.linalg.norm(s.matrix), 1.0)
    err = np.linalg.norm(recon - s.matrix) / scale
    if err > reconstruction_tol:
        raise NumericalError(
            f"eigendecomposition reconstruction error {err:.3e} exceeds "
            f"tolerance {reconstruction_tol:.1e}"
        )
    return EigenSystem(lam, q)


def load_graph(path) -> Graph:
    """Read a plain-text edge list: header ``#nodes I`` then ``row col weight``
    per line (0-based).  Symmetric closure is applied on load."""
    n_nodes = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#nodes"):
                parts = line.split()
                if len(parts) != 2:
                    raise ValidationError(f"{path}:{lineno}: malformed header {line!r}")
                n_nodes = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 'row col weight'")
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if n_nodes is None:
        raise ValidationError(f"{path}: missing '#nodes I' header")
    return Graph.from_edges(n_nodes, edges)


def save_graph(g: Graph, path) -> None:
    """Write the upper triangle (incl. diagonal) as an edge list."""
    w = g.weights
    rows, cols = np.nonzero(np.triu(w))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes {g.size}\n")
        for r, c in zip(rows, cols):
            fh.write(f"{r} {c} {w[r, c]:.17g}\n")
