"""Pure-numpy implementations of the hot kernels.

Selected at import when the compiled extension is unavailable (or when
``TPLP_PURE_PYTHON`` is set).  Semantics are identical to the compiled
versions; ``num_threads`` is accepted for interface parity but numpy's own
threading applies.  Work is chunked over entries to bound the (chunk x k)
intermediates.
"""
from __future__ import annotations

import numpy as np

NAME = "numpy"

_CHUNK = 4096


def compress_sparse(idx, vals, qcat, offsets, num_threads=0):
    """k-vector v with v_j = sum_e vals[e] * prod_l qcat[offsets[l]+idx[e,l], j].

    ``qcat`` stacks the per-graph selected-eigenvector matrices row-wise;
    ``offsets[l]`` is the row offset of graph l's block.
    """
    idx = np.asarray(idx, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    qcat = np.asarray(qcat, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    n = idx.shape[1]
    k = qcat.shape[1]
    out = np.zeros(k)
    for start in range(0, idx.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        block = vals[sl, None] * qcat[offsets[0] + idx[sl, 0], :]
        for l in range(1, n):
            block *= qcat[offsets[l] + idx[sl, l], :]
        out += block.sum(axis=0)
    return out


def score_entries(idx, weights, qcat, offsets, num_threads=0):
    """Per-entry expansion: out[e] = sum_j weights[j] * prod_l qcat[offsets[l]+idx[e,l], j]."""
    idx = np.asarray(idx, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    qcat = np.asarray(qcat, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    n = idx.shape[1]
    out = np.empty(idx.shape[0])
    for start in range(0, idx.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        block = qcat[offsets[0] + idx[sl, 0], :].copy()
        for l in range(1, n):
            block *= qcat[offsets[l] + idx[sl, l], :]
        out[sl] = block @ weights
    return out
