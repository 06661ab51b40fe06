"""Kernel backends: naive-loop oracles, backend parity, thread independence."""
import numpy as np
import pytest

from tplp import _kernels
from tplp._kernels import _numpy, pack_factors


def _setup(dims, nnz, k, seed):
    rng = np.random.default_rng(seed)
    flat = rng.choice(int(np.prod(dims)), size=nnz, replace=False)
    idx = np.ascontiguousarray(np.array(np.unravel_index(flat, dims)).T, dtype=np.int64)
    vals = rng.random(nnz)
    factors = [rng.standard_normal((n, k)) for n in dims]
    return idx, vals, factors


def naive_compress(idx, vals, factors):
    k = factors[0].shape[1]
    out = np.zeros(k)
    for e in range(vals.size):
        for j in range(k):
            prod = vals[e]
            for l, f in enumerate(factors):
                prod *= f[idx[e, l], j]
            out[j] += prod
    return out


def naive_score(idx, weights, factors):
    out = np.zeros(idx.shape[0])
    for e in range(idx.shape[0]):
        for j in range(weights.size):
            prod = weights[j]
            for l, f in enumerate(factors):
                prod *= f[idx[e, l], j]
            out[e] += prod
    return out


def test_numpy_compress_matches_naive():
    idx, vals, factors = _setup((4, 3, 5), nnz=9, k=6, seed=0)
    qcat, offsets = pack_factors(factors)
    got = _numpy.compress_sparse(idx, vals, qcat, offsets)
    np.testing.assert_allclose(got, naive_compress(idx, vals, factors), atol=1e-12)


def test_numpy_score_matches_naive():
    idx, vals, factors = _setup((4, 3, 5), nnz=7, k=5, seed=1)
    rng = np.random.default_rng(2)
    w = rng.standard_normal(5)
    qcat, offsets = pack_factors(factors)
    got = _numpy.score_entries(idx, w, qcat, offsets)
    np.testing.assert_allclose(got, naive_score(idx, w, factors), atol=1e-12)


def test_active_backend_matches_naive():
    idx, vals, factors = _setup((5, 4), nnz=11, k=7, seed=3)
    qcat, offsets = pack_factors(factors)
    got = _kernels.compress_sparse(idx, vals, qcat, offsets)
    np.testing.assert_allclose(got, naive_compress(idx, vals, factors), atol=1e-12)


@pytest.mark.skipif(_kernels.BACKEND == "numpy", reason="compiled backend unavailable")
def test_backend_parity():
    """Compiled and numpy kernels agree to near machine precision."""
    idx, vals, factors = _setup((6, 5, 4), nnz=40, k=32, seed=4)
    rng = np.random.default_rng(5)
    w = rng.standard_normal(32)
    qcat, offsets = pack_factors(factors)

    from tplp._kernels import _core

    v_fast = _core.compress_sparse(idx, vals, qcat, offsets, 0)
    v_ref = _numpy.compress_sparse(idx, vals, qcat, offsets)
    np.testing.assert_allclose(v_fast, v_ref, rtol=1e-13, atol=1e-13)

    s_fast = _core.score_entries(idx, w, qcat, offsets, 0)
    s_ref = _numpy.score_entries(idx, w, qcat, offsets)
    np.testing.assert_allclose(s_fast, s_ref, rtol=1e-13, atol=1e-13)


@pytest.mark.skipif(_kernels.BACKEND == "numpy", reason="compiled backend unavailable")
def test_thread_count_does_not_change_results():
    idx, vals, factors = _setup((8, 7, 6), nnz=120, k=300, seed=6)
    rng = np.random.default_rng(7)
    w = rng.standard_normal(300)
    qcat, offsets = pack_factors(factors)

    from tplp._kernels import _core

    v1 = _core.compress_sparse(idx, vals, qcat, offsets, 1)
    v4 = _core.compress_sparse(idx, vals, qcat, offsets, 4)
    np.testing.assert_array_equal(v1, v4)

    s1 = _core.score_entries(idx, w, qcat, offsets, 1)
    s4 = _core.score_entries(idx, w, qcat, offsets, 4)
    np.testing.assert_array_equal(s1, s4)


def test_empty_entry_set():
    _, _, factors = _setup((3, 3), nnz=2, k=4, seed=8)
    qcat, offsets = pack_factors(factors)
    idx = np.zeros((0, 2), dtype=np.int64)
    v = _kernels.compress_sparse(idx, np.zeros(0), qcat, offsets)
    np.testing.assert_array_equal(v, np.zeros(4))
    s = _kernels.score_entries(idx, np.zeros(4), qcat, offsets)
    assert s.size == 0


def test_pack_factors_layout():
    rng = np.random.default_rng(9)
    factors = [rng.random((3, 2)), rng.random((5, 2))]
    qcat, offsets = pack_factors(factors)
    assert qcat.shape == (8, 2)
    np.testing.assert_array_equal(offsets, [0, 3])  # row offset of each mode
    np.testing.assert_array_equal(qcat[0:3], factors[0])
    np.testing.assert_array_equal(qcat[3:8], factors[1])
