"""Kernel machine regression and kernel distance covariance association tests."""

from .assoc import (
    PermutationPlan,
    TestResult,
    full_enumeration_test,
    kdc_statistic,
    kmr_score,
    permutation_test,
    run_test,
)
from .errors import (
    DegenerateFit,
    InvalidInput,
    InvalidParameter,
    KMRKDCError,
    ParseError,
    RankDeficient,
    TooFewSamples,
    TooLarge,
)
from .kernels import (
    KernelSpec,
    double_center,
    gaussian_rbf_kernel,
    gower_from_sq_dist,
    ibs_kernel,
    l2_distance_kernel,
    linear_kernel,
    pairwise_sq_dist,
    polynomial_kernel,
    quadratic_kernel,
)
from .linreg import FittedAdjustment, hat_matrix, pseudo_f, pseudo_f_distance, residualize

__version__ = "0.1.0"

__all__ = [
    "DegenerateFit",
    "FittedAdjustment",
    "InvalidInput",
    "InvalidParameter",
    "KMRKDCError",
    "KernelSpec",
    "ParseError",
    "PermutationPlan",
    "RankDeficient",
    "TestResult",
    "TooFewSamples",
    "TooLarge",
    "double_center",
    "full_enumeration_test",
    "gaussian_rbf_kernel",
    "gower_from_sq_dist",
    "hat_matrix",
    "ibs_kernel",
    "kdc_statistic",
    "kmr_score",
    "l2_distance_kernel",
    "linear_kernel",
    "pairwise_sq_dist",
    "permutation_test",
    "polynomial_kernel",
    "pseudo_f",
    "pseudo_f_distance",
    "quadratic_kernel",
    "residualize",
    "run_test",
]
