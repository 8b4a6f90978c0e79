"""Orthogonal rank-1 tensor decompositions computed by a tree of SVDs."""
from .analysis import (
    deflation_experiment,
    intermediate_product_trace,
    permutation_scan,
    perturbation_report,
    perturbation_trials,
    sv_curve,
)
from .complement import build_table, complement_basis, verify_complement
from .cp_als import CPDecomposition, cp_als, cp_error
from .decomposition import (
    SigmaTerm,
    TTr1Decomposition,
    TTr1Node,
    approximation_error,
    approxi_rank_gap,
    branching_ranks,
    decompose,
    decompose_pruned,
    default_rank_threshold,
    dumps_decomposition,
    loads_decomposition,
    numerical_rank,
    reconstruct,
    select_branches,
    svd_count_bound,
    term_count_bound,
    truncate_to_tolerance,
)
from .errors import ArgumentError, NumericalError, TTr1Error
from .rank3 import construct_rank3, rank3_report
from .svd import MatrixSVD, svd_econ, svd_full
from .tensor import (
    DenseTensor,
    RankOneTerm,
    dumps_tensor,
    frobenius_norm,
    gaussian_tensor,
    inner_product,
    inverse_sum_tensor,
    loads_tensor,
    mode_product,
    outer_product,
    permute_indices,
    reshape_to_matrix,
    running_example,
)
from .tucker import TuckerDecomposition, core_sparsity, to_tucker

__version__ = "0.1.0"
