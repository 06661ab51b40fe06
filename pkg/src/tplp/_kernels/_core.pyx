# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled gather-multiply-accumulate kernels.

Both kernels walk an (entries x modes) index array against a row-stacked
bank of per-graph factor matrices.  Compression parallelizes over disjoint
column blocks and scoring over entries, so results are independent of the
thread count (no cross-thread accumulation order changes).
"""
import numpy as np

cimport numpy as cnp
from cython.parallel cimport parallel, prange
cimport openmp

cnp.import_array()

NAME = "cython"

DEF COL_BLOCK = 128


def compress_sparse(cnp.int64_t[:, ::1] idx, double[::1] vals,
                    double[:, ::1] qcat, cnp.int64_t[::1] offsets,
                    int num_threads=0):
    """k-vector v with v_j = sum_e vals[e] * prod_l qcat[offsets[l]+idx[e,l], j]."""
    cdef Py_ssize_t nnz = idx.shape[0]
    cdef Py_ssize_t n = idx.shape[1]
    cdef Py_ssize_t k = qcat.shape[1]
    out_arr = np.zeros(k)
    cdef double[::1] out = out_arr
    if nnz == 0 or k == 0:
        return out_arr
    cdef int nthreads = num_threads if num_threads > 0 else openmp.omp_get_max_threads()
    cdef Py_ssize_t nblocks = (k + COL_BLOCK - 1) // COL_BLOCK
    tmp_arr = np.empty((nblocks, COL_BLOCK))
    cdef double[:, ::1] tmp = tmp_arr
    cdef Py_ssize_t b, j0, j1, e, l, j
    cdef Py_ssize_t row
    cdef double val

    for b in prange(nblocks, nogil=True, schedule="static", num_threads=nthreads):
        j0 = b * COL_BLOCK
        j1 = j0 + COL_BLOCK
        if j1 > k:
            j1 = k
        for e in range(nnz):
            val = vals[e]
            for j in range(j0, j1):
                tmp[b, j - j0] = val
            for l in range(n):
                row = offsets[l] + idx[e, l]
                for j in range(j0, j1):
                    tmp[b, j - j0] = tmp[b, j - j0] * qcat[row, j]
            for j in range(j0, j1):
                out[j] += tmp[b, j - j0]
    return out_arr


def score_entries(cnp.int64_t[:, ::1] idx, double[::1] weights,
                  double[:, ::1] qcat, cnp.int64_t[::1] offsets,
                  int num_threads=0):
    """Per-entry expansion: out[e] = sum_j weights[j] * prod_l qcat[offsets[l]+idx[e,l], j]."""
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t n = idx.shape[1]
    cdef Py_ssize_t k = qcat.shape[1]
    out_arr = np.zeros(m)
    cdef double[::1] out = out_arr
    if m == 0 or k == 0:
        return out_arr
    cdef int nthreads = num_threads if num_threads > 0 else openmp.omp_get_max_threads()
    tmp_arr = np.empty((nthreads, k))
    cdef double[:, ::1] tmp = tmp_arr
    cdef Py_ssize_t e, l, j
    cdef Py_ssize_t row
    cdef int tid
    cdef double acc

    with nogil, parallel(num_threads=nthreads):
        tid = openmp.omp_get_thread_num()
        for e in prange(m, schedule="static"):
            for j in range(k):
                tmp[tid, j] = weights[j]
            for l in range(n):
                row = offsets[l] + idx[e, l]
                for j in range(k):
                    tmp[tid, j] = tmp[tid, j] * qcat[row, j]
            acc = 0.0
            for j in range(k):
                acc = acc + tmp[tid, j]
            out[e] = acc
    return out_arr
