"""Characteristic functions, functional models and invariant subspaces for
commuting row contractions on finite-dimensional spaces."""

from .beurling import (
    InvariantSubspace,
    blh_decompose,
    inner_from_invariant,
    invariant_span,
    is_inner,
    is_purely_contractive,
    multiplier_range,
    tuple_from_inner,
)
from .charfn import ball_grid, check_kernel_identity, check_theta_identity, eval_kT, eval_theta
from .coincidence import (
    CoincidenceWitness,
    SampledOperatorFunction,
    decide_coincidence,
    decide_weak_coincidence,
    sample_theta,
    support,
)
from .errors import CncError, InputError, NoSolution, NumericalFailure, SizeOverflow
from .fockspace import (
    TaylorCoefficients,
    TruncatedFockSpace,
    build_space,
    check_dilation_identities,
    multiplier_matrix,
    shift_matrices,
    theta_taylor,
)
from .linalg import Subspace, isometry_from_gram, psd_sqrt
from .mobius import MobiusMap, phi_a, transform_tuple, verify_transformation_law
from .model import build_model, equivalence_from_coincidence, model_tuple, mv_form
from .tuples import OperatorTuple, classify, defects, limit_AT, validate

__version__ = "0.1.0"

__all__ = [
    "CncError",
    "CoincidenceWitness",
    "InputError",
    "InvariantSubspace",
    "MobiusMap",
    "NoSolution",
    "NumericalFailure",
    "OperatorTuple",
    "SampledOperatorFunction",
    "SizeOverflow",
    "Subspace",
    "TaylorCoefficients",
    "TruncatedFockSpace",
    "ball_grid",
    "blh_decompose",
    "build_model",
    "build_space",
    "check_dilation_identities",
    "check_kernel_identity",
    "check_theta_identity",
    "classify",
    "decide_coincidence",
    "decide_weak_coincidence",
    "defects",
    "equivalence_from_coincidence",
    "eval_kT",
    "eval_theta",
    "inner_from_invariant",
    "invariant_span",
    "is_inner",
    "is_purely_contractive",
    "isometry_from_gram",
    "limit_AT",
    "model_tuple",
    "multiplier_matrix",
    "multiplier_range",
    "mv_form",
    "phi_a",
    "psd_sqrt",
    "sample_theta",
    "shift_matrices",
    "support",
    "theta_taylor",
    "transform_tuple",
    "tuple_from_inner",
    "validate",
    "verify_transformation_law",
]
