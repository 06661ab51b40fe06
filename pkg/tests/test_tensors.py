"""Tensor containers and contraction kernels against dense einsum oracles."""
import numpy as np
import pytest

from tplp.errors import CapExceededError, ValidationError
from tplp.spectrum import select_eigenpairs
from tplp.tensors import (
    CPTensor,
    SparseTensor,
    cp_entries,
    cp_entry,
    khatri_rao,
    khatri_rao_gram,
    load_cp_tensor,
    load_sparse_tensor,
    matricized_compress,
    save_cp_tensor,
    save_sparse_tensor,
    ttv_all,
)

from conftest import random_instance


def random_sparse(dims, nnz, seed):
    rng = np.random.default_rng(seed)
    flat = rng.choice(int(np.prod(dims)), size=nnz, replace=False)
    idx = np.array(np.unravel_index(flat, dims)).T
    vals = rng.random(nnz) + 0.1
    return SparseTensor(tuple(dims), idx, vals)


def random_cp(dims, rank, seed):
    rng = np.random.default_rng(seed)
    return CPTensor(tuple(rng.random((n, rank)) for n in dims))


# -- SparseTensor ------------------------------------------------------------


def test_sparse_round_trips_dense():
    t = random_sparse((3, 4, 2), nnz=7, seed=0)
    dense = t.to_dense()
    back = np.zeros_like(dense)
    for row, v in zip(t.indices, t.values):
        back[tuple(row)] = v
    np.testing.assert_array_equal(dense, back)


def test_sparse_entries_sorted_lexicographically():
    t = random_sparse((4, 4), nnz=9, seed=1)
    rows = [tuple(r) for r in t.indices]
    assert rows == sorted(rows)


def test_sparse_rejects_duplicates():
    with pytest.raises(ValidationError):
        SparseTensor((2, 2), np.array([[0, 1], [0, 1]]), np.array([1.0, 2.0]))


def test_sparse_rejects_out_of_range():
    with pytest.raises(ValidationError):
        SparseTensor((2, 2), np.array([[0, 2]]), np.array([1.0]))


def test_sparse_dense_cap():
    t = SparseTensor((200, 200, 200), np.array([[0, 0, 0]]), np.array([1.0]))
    with pytest.raises(CapExceededError):
        t.to_dense()


def test_sparse_file_round_trip(tmp_path):
    t = random_sparse((3, 5, 2), nnz=6, seed=2)
    path = tmp_path / "t.txt"
    save_sparse_tensor(t, path)
    back = load_sparse_tensor(path)
    assert back.dims == t.dims
    np.testing.assert_array_equal(back.indices, t.indices)
    np.testing.assert_allclose(back.values, t.values, rtol=1e-12)


# -- CPTensor ----------------------------------------------------------------


def test_cp_to_dense_is_sum_of_outer_products():
    t = random_cp((3, 2, 4), rank=3, seed=0)
    dense = t.to_dense()
    expect = np.einsum("ir,jr,kr->ijk", *t.factors)
    np.testing.assert_allclose(dense, expect, atol=1e-13)


def test_cp_entry_matches_dense():
    t = random_cp((3, 4), rank=2, seed=1)
    dense = t.to_dense()
    for idx in [(0, 0), (2, 3), (1, 2)]:
        assert cp_entry(t, idx) == pytest.approx(dense[idx], abs=1e-13)


def test_cp_entries_batch_matches_scalar():
    t = random_cp((4, 3, 2), rank=3, seed=2)
    idx = np.array([[0, 0, 0], [3, 2, 1], [1, 1, 1], [3, 2, 1]])
    batch = cp_entries(t, idx)
    singles = [cp_entry(t, tuple(r)) for r in idx]
    np.testing.assert_allclose(batch, singles, atol=1e-13)


def test_cp_to_sparse_round_trip():
    t = random_cp((3, 3), rank=2, seed=3)
    sp = t.to_sparse()
    np.testing.assert_allclose(sp.to_dense(), t.to_dense(), atol=1e-12)


def test_cp_rejects_mismatched_ranks():
    with pytest.raises(ValidationError):
        CPTensor((np.zeros((3, 2)), np.zeros((4, 3))))


def test_cp_file_round_trip(tmp_path):
    t = random_cp((3, 2, 5), rank=4, seed=4)
    path = tmp_path / "cp.txt"
    save_cp_tensor(t, path)
    back = load_cp_tensor(path)
    assert back.rank == 4 and back.dims == (3, 2, 5)
    for a, b in zip(back.factors, t.factors):
        np.testing.assert_allclose(a, b, rtol=1e-12)


# -- contractions ------------------------------------------------------------


def test_ttv_all_matches_dense_einsum():
    t = random_sparse((3, 4, 2), nnz=10, seed=5)
    rng = np.random.default_rng(6)
    vecs = [rng.standard_normal(n) for n in t.dims]
    expect = np.einsum("ijk,i,j,k->", t.to_dense(), *vecs)
    assert ttv_all(t, vecs) == pytest.approx(expect, abs=1e-12)


def test_matricized_compress_equals_per_column_ttv():
    dims = (3, 4, 2)
    _, _, eigs = random_instance(dims, seed=7)
    spec = select_eigenpairs(eigs, 0.3, 6)
    t = random_sparse(dims, nnz=8, seed=8)
    v = matricized_compress(t, spec)
    per_col = np.array(
        [ttv_all(t, [q[:, j] for q in spec.q_select]) for j in range(6)]
    )
    np.testing.assert_allclose(v, per_col, atol=1e-12)


def test_khatri_rao_explicit_columns():
    rng = np.random.default_rng(9)
    a, b = rng.random((3, 4)), rng.random((2, 4))
    kr = khatri_rao(a, b)
    assert kr.shape == (6, 4)
    for j in range(4):
        np.testing.assert_allclose(kr[:, j], np.kron(a[:, j], b[:, j]), atol=1e-14)


def test_khatri_rao_gram_identity():
    # (A (.) B)^T (C (.) D) = (A^T C) * (B^T D)
    rng = np.random.default_rng(10)
    a, c = rng.random((5, 3)), rng.random((5, 4))
    b, d = rng.random((2, 3)), rng.random((2, 4))
    lhs = khatri_rao(a, b).T @ khatri_rao(c, d)
    rhs = khatri_rao_gram(a, b, c, d)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
