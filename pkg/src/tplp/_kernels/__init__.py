"""Hot-kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used.  Set ``TPLP_PURE_PYTHON=1`` to force the fallback.  Both
backends expose identical functions and produce identical results.
"""
from __future__ import annotations

import os

import numpy as np

from . import _numpy

if os.environ.get("TPLP_PURE_PYTHON"):
    _backend = _numpy
else:
    try:
        from . import _core as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _numpy

BACKEND = _backend.NAME


def pack_factors(factor_matrices) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-graph factor matrices row-wise for the kernels.

    Returns (qcat, offsets): qcat is the (sum I_i) x k row-stacked bank and
    offsets[l] the first row of graph l's block.
    """
    mats = [np.ascontiguousarray(m, dtype=np.float64) for m in factor_matrices]
    offsets = np.zeros(len(mats), dtype=np.int64)
    for l in range(1, len(mats)):
        offsets[l] = offsets[l - 1] + mats[l - 1].shape[0]
    return np.ascontiguousarray(np.vstack(mats)), offsets


def compress_sparse(idx, vals, qcat, offsets, num_threads: int = 0) -> np.ndarray:
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    return _backend.compress_sparse(idx, vals, qcat, offsets, num_threads)


def score_entries(idx, weights, qcat, offsets, num_threads: int = 0) -> np.ndarray:
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    return _backend.score_entries(idx, weights, qcat, offsets, num_threads)
