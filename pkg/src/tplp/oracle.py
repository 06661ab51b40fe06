"""Dense reference implementations of propagation on the product graph.

Everything here materializes the full Kronecker operator, so instances are
capped (default 1e6 dense entries) and inputs above the cap are refused
rather than silently approximated.  Intended purely for correctness testing
of the low-rank pipeline at tiny scale.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import CapExceededError, NumericalError, ValidationError
from .graphs import NormalizedGraph, eigendecompose
from .spectrum import _check_alpha

DENSE_CAP = 1_000_000

# The two internal closed-form routes (linear solve vs. eigen-expansion)
# must agree to this absolute tolerance.
_CROSS_CHECK_TOL = 1e-9


def _matrices(graphs) -> list[np.ndarray]:
    mats = []
    for g in graphs:
        mats.append(g.matrix if isinstance(g, NormalizedGraph) else np.asarray(g, dtype=np.float64))
    return mats


def _check_cap(dims, cap: int) -> None:
    total = math.prod(dims)
    if total > cap:
        raise CapExceededError(
            f"dense oracle refuses {total} entries (cap {cap}); "
            "oracles stay exact instead of approximating"
        )


def kron_all(matrices) -> np.ndarray:
    """Kronecker product of a list of matrices, first factor outermost.

    Matches C-order flattening of a tensor whose mode l is graph l.
    """
    out = np.ones((1, 1))
    for m in matrices:
        out = np.kron(out, np.asarray(m, dtype=np.float64))
    return out


def _mode_products(y: np.ndarray, mats: list[np.ndarray]) -> np.ndarray:
    """Multiply mode l of y by mats[l] for every l."""
    for l, m in enumerate(mats):
        y = np.moveaxis(np.tensordot(m, y, axes=(1, l)), 0, l)
    return y


def exact_iterate(
    graphs,
    y0: np.ndarray,
    alpha: float,
    t: int,
    stop_tol: float = 0.0,
) -> np.ndarray:
    """Run t propagation iterations y <- alpha * (y x_l S_l forall l) + (1-alpha) y0.

    With ``stop_tol`` > 0 iteration ends early when the Frobenius norm of the
    update drops to the tolerance.
    """
    alpha = _check_alpha(alpha)
    mats = _matrices(graphs)
    y0 = np.asarray(y0, dtype=np.float64)
    dims = tuple(m.shape[0] for m in mats)
    if y0.shape != dims:
        raise ValidationError(f"initial tensor shape {y0.shape} does not match graphs {dims}")
    _check_cap(dims, DENSE_CAP)
    y = y0.copy()
    for _ in range(t):
        y_next = alpha * _mode_products(y, mats) + (1.0 - alpha) * y0
        delta = np.linalg.norm(y_next - y)
        y = y_next
        if stop_tol > 0.0 and delta <= stop_tol:
            break
    return y


def exact_closed_form(graphs, y0: np.ndarray, alpha: float) -> np.ndarray:
    """Closed form (1-alpha)(I - alpha*S)^{-1} vec(Y0), densely.

    Computed two ways (direct linear solve and the eigen-expansion of the
    product operator) and cross-checked; disagreement raises NumericalError.
    """
    alpha = _check_alpha(alpha)
    mats = _matrices(graphs)
    y0 = np.asarray(y0, dtype=np.float64)
    dims = tuple(m.shape[0] for m in mats)
    if y0.shape != dims:
        raise ValidationError(f"initial tensor shape {y0.shape} does not match graphs {dims}")
    _check_cap(dims, DENSE_CAP)
    total = math.prod(dims)
    s_full = kron_all(mats)
    vec = y0.reshape(-1)

    try:
        direct = (1.0 - alpha) * np.linalg.solve(np.eye(total) - alpha * s_full, vec)
    except np.linalg.LinAlgError as exc:  # singular only for invalid alpha
        raise NumericalError(f"closed-form solve failed: {exc}") from exc

    eigs = [eigendecompose(NormalizedGraph(m)) for m in mats]
    q_full = kron_all([e.eigenvectors for e in eigs])
    lam_full = np.ones(1)
    for e in eigs:
        lam_full = np.kron(lam_full, e.eigenvalues)
    via_eigen = (1.0 - alpha) * (q_full @ ((q_full.T @ vec) / (1.0 - alpha * lam_full)))

    dev = np.abs(direct - via_eigen).max()
    if dev > _CROSS_CHECK_TOL:
        raise NumericalError(
            f"closed-form routes disagree by {dev:.3e} (tolerance {_CROSS_CHECK_TOL:.1e})"
        )
    return direct.reshape(dims)


def transform_matrix(graphs, alpha: float) -> np.ndarray:
    """The dense propagation operator A = (I - alpha*S)^{-1}."""
    alpha = _check_alpha(alpha)
    mats = _matrices(graphs)
    dims = tuple(m.shape[0] for m in mats)
    _check_cap(dims, DENSE_CAP)
    total = math.prod(dims)
    s_full = kron_all(mats)
    return np.linalg.inv(np.eye(total) - alpha * s_full)


def best_rank_k_transform(graphs, alpha: float, k: int) -> np.ndarray:
    """Best rank-k approximation of A = (I - alpha*S)^{-1} in 2/F norms.

    A is symmetric positive definite, so the optimal truncation keeps the k
    largest eigenvalues.  k = 0 returns the zero matrix.
    """
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    a = transform_matrix(graphs, alpha)
    if k >= a.shape[0]:
        return a
    if k == 0:
        return np.zeros_like(a)
    w, q = np.linalg.eigh(a)
    top = np.argsort(w)[::-1][:k]
    return (q[:, top] * w[top][None, :]) @ q[:, top].T
