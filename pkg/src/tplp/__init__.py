"""Low-rank label propagation on the tensor product of multiple graphs.

The transition structure is the Kronecker product of the symmetrically
normalized adjacency matrices, with the first graph as the outermost
Kronecker factor (C-order flattening of index tuples). The closed-form
propagation solution is approximated through a rank-k truncation of the
product spectrum, selected without materializing the product.
"""
from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import CapExceededError, NumericalError, ValidationError
from .graphs import (
    EigenSystem,
    Graph,
    NormalizedGraph,
    eigendecompose,
    load_graph,
    normalize,
    save_graph,
)
from .oracle import (
    best_rank_k_transform,
    exact_closed_form,
    exact_iterate,
    kron_all,
    transform_matrix,
)
from .pairwise import cp_from_pairwise, load_pairwise, split_factors, stack_pairwise, symnmf
from .propagation import PropagationModel, ScoreTable, build_model, compress, predict, score
from .simulate import SimConfig, run_simulation
from .spectrum import (
    SelectedSpectrum,
    filter_scores,
    filter_weights,
    load_spectrum,
    perturbation_norms,
    save_spectrum,
    select_eigenpairs,
    top_bot_2k,
)
from .tensors import (
    CPTensor,
    SparseTensor,
    load_cp_tensor,
    load_sparse_tensor,
    save_cp_tensor,
    save_sparse_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "CapExceededError",
    "NumericalError",
    "ValidationError",
    "EigenSystem",
    "Graph",
    "NormalizedGraph",
    "eigendecompose",
    "load_graph",
    "normalize",
    "save_graph",
    "best_rank_k_transform",
    "exact_closed_form",
    "exact_iterate",
    "kron_all",
    "transform_matrix",
    "cp_from_pairwise",
    "load_pairwise",
    "split_factors",
    "stack_pairwise",
    "symnmf",
    "PropagationModel",
    "ScoreTable",
    "build_model",
    "compress",
    "predict",
    "score",
    "SimConfig",
    "run_simulation",
    "SelectedSpectrum",
    "filter_scores",
    "filter_weights",
    "load_spectrum",
    "perturbation_norms",
    "save_spectrum",
    "select_eigenpairs",
    "top_bot_2k",
    "CPTensor",
    "SparseTensor",
    "load_cp_tensor",
    "load_sparse_tensor",
    "save_cp_tensor",
    "save_sparse_tensor",
    "__version__",
]
