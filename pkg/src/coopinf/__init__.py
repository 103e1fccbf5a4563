"""Sinkhorn scaling, stable pairs and the cooperative index of non-negative matrices."""

# ruff: noqa: F401

from .crossratio import (
    CrossRatioProfile,
    cr_equivalent,
    cross_ratio_profile,
    preimage_member,
    verify_preimage_distance,
)
from .errors import *  # noqa: F403
from .index import (
    BvNDecomposition,
    CIBounds,
    LowConfidence,
    bvn_decompose,
    ci_bounds,
    ci_from_pair,
    cooperative_index,
)
from .io import dumps, load_matrix, read_matrix, write_matrix
from .matrix import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    TAU_NORM,
    as_matrix,
    check_doubly_stochastic,
    col_normalize,
    matrix_distance,
    pattern,
    permutation_matrix,
    row_normalize,
)
from .patterns import (
    DiagonalSet,
    SupportClassification,
    apply_max_pattern,
    classify_support,
    count_indecomposable_components,
    diagonal_count,
    enumerate_diagonals,
    has_positive_diagonal,
    limit_support,
)
from .perturbation import (
    PerturbationReport,
    alpha3_bound_check,
    continuity_sweep,
    perturb,
    sensitivity_report,
)
from .sinkhorn import (
    SinkhornResult,
    StablePair,
    block_column_sum_error,
    block_structure,
    entropic_transport,
    extract_scaling,
    scalar_sinkhorn,
    sinkhorn,
    sinkhorn_on_pattern,
)
from .witness import StableWitness, construct_stable_witness, verify_stable

__version__ = "0.1.0"
