"""Simulation designs and the size/power study driver."""

from .generators import (
    FRONTAL_ROI_CORRELATION,
    SIGMA_DEPENDENT,
    SIGMA_INDEPENDENT,
    AdniSimConfig,
    Sim1Config,
    Sim2Config,
    adni_sim_generate,
    draw_maf,
    frontal_covariance,
    h1,
    sim1_generate,
    sim2_generate,
)
from .study import (
    GENOTYPE_METHODS,
    RBF_METHODS,
    TABLE1_METHODS,
    Method,
    StudyCell,
    StudyResult,
    default_cells,
    default_methods,
    kdc,
    kmr,
    run_study,
    size_power_study,
)

__all__ = [
    "FRONTAL_ROI_CORRELATION",
    "SIGMA_DEPENDENT",
    "SIGMA_INDEPENDENT",
    "AdniSimConfig",
    "Sim1Config",
    "Sim2Config",
    "adni_sim_generate",
    "draw_maf",
    "frontal_covariance",
    "h1",
    "sim1_generate",
    "sim2_generate",
    "GENOTYPE_METHODS",
    "RBF_METHODS",
    "TABLE1_METHODS",
    "Method",
    "StudyCell",
    "StudyResult",
    "default_cells",
    "default_methods",
    "kdc",
    "kmr",
    "run_study",
    "size_power_study",
]
