"""Data-generating processes for the three simulation designs.

Every generator is a pure function of its config (including ``seed``).
Random draws happen in a fixed order that does not depend on the effect
size ``a``, the effect type or the error covariance, so cells that differ
only in those settings share their underlying random numbers.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from ..errors import InvalidInput, InvalidParameter
from ..rng import MAF_DOMAIN, stream_start

log = logging.getLogger(__name__)

SIGMA_INDEPENDENT = np.diag([0.95, 0.86, 0.89])
SIGMA_DEPENDENT = np.array(
    [
        [0.95, 0.57, 0.43],
        [0.57, 0.86, 0.24],
        [0.43, 0.24, 0.89],
    ]
)

# pairwise correlations of eight frontal-cortex ROIs (left/right anterior
# dorsolateral, posterior dorsolateral, anterior medial, posterior medial)
FRONTAL_ROI_CORRELATION = np.array(
    [
        [1.00, 0.95, 0.97, 0.87, 0.53, 0.97, -0.99, -0.87],
        [0.95, 1.00, 1.00, 0.98, 0.77, 1.00, -0.90, -0.66],
        [0.97, 1.00, 1.00, 0.96, 0.72, 1.00, -0.94, -0.72],
        [0.87, 0.98, 0.96, 1.00, 0.88, 0.97, -0.81, -0.51],
        [0.53, 0.77, 0.72, 0.88, 1.00, 0.73, -0.43, -0.04],
        [0.97, 1.00, 1.00, 0.97, 0.73, 1.00, -0.93, -0.71],
        [-0.99, -0.90, -0.94, -0.81, -0.43, -0.93, 1.00, 0.92],
        [-0.87, -0.66, -0.72, -0.51, -0.04, -0.71, 0.92, 1.00],
    ]
)

GENDER_PROBABILITY = 0.36
EIGEN_FLOOR = 1e-8


def h1(z) -> np.ndarray | float:
    """Nonlinear five-locus effect with pairwise interactions.

    ``z`` is a 5-vector or an ``(n, 5)`` array; extra columns are ignored.
    """
    a = np.asarray(z, dtype=np.float64)
    z1, z2, z3, z4, z5 = (a[..., i] for i in range(5))
    out = (
        2 * np.cos(z1)
        - 3 * z2**2
        + 2 * np.exp(-z3) * z4
        - 1.6 * np.sin(z5) * np.cos(z3)
        + 4 * z1 * z5
    )
    return float(out) if out.ndim == 0 else out


def project_psd(matrix: np.ndarray, floor: float = EIGEN_FLOOR) -> tuple[np.ndarray, np.ndarray]:
    """Nearest symmetric PSD matrix by eigenvalue clipping.

    Returns ``(projected, eigenvalues)`` where ``eigenvalues`` are those of
    the input before clipping.
    """
    sym = 0.5 * (matrix + matrix.T)
    vals, vecs = np.linalg.eigh(sym)
    clipped = np.maximum(vals, floor)
    out = (vecs * clipped) @ vecs.T
    return 0.5 * (out + out.T), vals


def mvn_factor(cov: np.ndarray) -> np.ndarray:
    """``A`` with ``A A' = cov`` (after flooring eigenvalues at ``EIGEN_FLOOR``)."""
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    return vecs * np.sqrt(np.maximum(vals, EIGEN_FLOOR))


def draw_maf(seed: int, q: int, low: float = 0.1, high: float = 0.4) -> tuple[float, ...]:
    """Per-locus minor-allele frequencies, fixed for a whole study."""
    rng = np.random.default_rng(stream_start(seed, 0, MAF_DOMAIN))
    return tuple(float(v) for v in rng.uniform(low, high, size=q))


def _check_maf(maf, q: int) -> np.ndarray:
    arr = np.asarray(maf, dtype=np.float64)
    if arr.shape != (q,):
        raise InvalidParameter(f"maf must have {q} entries, got shape {arr.shape}")
    if np.any(arr <= 0) or np.any(arr > 0.5):
        raise InvalidParameter("maf entries must lie in (0, 0.5]")
    return arr


@dataclass(frozen=True)
class Sim1Config:
    """Single phenotype, one covariate, five uniform predictors."""

    n: int = 60
    a: float = 0.0
    beta0: float = 0.0
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 10:
            raise InvalidParameter(f"n must be >= 10, got {self.n}")
        if self.a < 0:
            raise InvalidParameter(f"a must be >= 0, got {self.a}")

    def canonical(self) -> "Sim1Config":
        return self

    @property
    def labels(self) -> dict:
        return {"a": self.a, "sigma": "", "effect": ""}


def sim1_generate(cfg: Sim1Config) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Y (n,1), X (n,1), Z (n,5))``."""
    rng = np.random.default_rng(cfg.seed)
    z = rng.uniform(0.0, 1.0, size=(cfg.n, 5))
    u = rng.standard_normal(cfg.n)
    eps = rng.standard_normal(cfg.n)
    x = 3 * np.cos(z[:, 0]) + u
    y = cfg.beta0 + cfg.beta * x + cfg.a * h1(z) + eps
    return y.reshape(-1, 1), x.reshape(-1, 1), z


Effect = Literal["sparse", "common"]
SigmaKind = Literal["independent", "dependent"]


@dataclass(frozen=True)
class Sim2Config:
    """Three phenotypes, two covariates, nine SNP loci."""

    n: int = 100
    a: float = 0.0
    effect: Effect = "sparse"
    sigma: SigmaKind = "independent"
    maf: tuple[float, ...] | None = None
    beta: tuple[tuple[float, ...], ...] = ((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
    seed: int = 0
    q: int = field(default=9, init=False)
    p: int = field(default=3, init=False)

    def __post_init__(self):
        if self.n < 10:
            raise InvalidParameter(f"n must be >= 10, got {self.n}")
        if self.a < 0:
            raise InvalidParameter(f"a must be >= 0, got {self.a}")
        if self.effect not in ("sparse", "common"):
            raise InvalidParameter(f"effect must be 'sparse' or 'common', got {self.effect!r}")
        if self.sigma not in ("independent", "dependent"):
            raise InvalidParameter(
                f"sigma must be 'independent' or 'dependent', got {self.sigma!r}"
            )
        if self.maf is not None:
            _check_maf(self.maf, self.q)
        if np.shape(self.beta) != (2, self.p):
            raise InvalidParameter(f"beta must be 2x{self.p}")

    def canonical(self) -> "Sim2Config":
        # with a = 0 the effect type does not enter the data
        return replace(self, effect="sparse") if self.a == 0 else self

    @property
    def labels(self) -> dict:
        return {"a": self.a, "sigma": self.sigma, "effect": self.effect}


def sim2_effects(z: np.ndarray, a: float, effect: Effect) -> np.ndarray:
    """``(n, 3)`` matrix of genetic effects ``h_k(Z)``."""
    z1, z2, z3, z4, z5, z6, z7, z8, z9 = (z[:, i] for i in range(9))
    sparse = a * (z1 + z2 + z3 + z1 * z4 * z5 - z6 / 3 - z7 * z8 / 2 + (1 - z9))
    h = np.zeros((z.shape[0], 3))
    h[:, 0] = sparse
    if effect == "common":
        h[:, 0] += a * z3
        h[:, 1] = a * z3
        h[:, 2] = a * z3
    return h


def sim2_generate(cfg: Sim2Config) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Y (n,3), X (n,2), Z (n,9))``."""
    rng = np.random.default_rng(cfg.seed)
    maf = _check_maf(cfg.maf if cfg.maf is not None else draw_maf(cfg.seed, cfg.q), cfg.q)
    x = rng.standard_normal((cfg.n, 2)) + np.array([0.2, 0.4])
    z = rng.binomial(2, maf, size=(cfg.n, cfg.q)).astype(np.float64)
    sigma = SIGMA_INDEPENDENT if cfg.sigma == "independent" else SIGMA_DEPENDENT
    eps = rng.standard_normal((cfg.n, cfg.p)) @ mvn_factor(sigma).T
    y = x @ np.asarray(cfg.beta) + sim2_effects(z, cfg.a, cfg.effect) + eps
    return y, x, z


def frontal_covariance(correlation: np.ndarray = FRONTAL_ROI_CORRELATION) -> tuple[np.ndarray, np.ndarray]:
    """Error covariance for the ROI simulation and the raw eigenvalues.

    The correlation matrix is validated, then projected to the nearest PSD
    matrix by clipping eigenvalues at ``EIGEN_FLOOR``; unit variances are
    assumed.
    """
    r = np.asarray(correlation, dtype=np.float64)
    if r.shape != (8, 8):
        raise InvalidInput(f"ROI correlation must be 8x8, got {r.shape}")
    if not np.array_equal(r, r.T):
        raise InvalidInput("ROI correlation matrix is not symmetric")
    if not np.all(np.diag(r) == 1.0):
        raise InvalidInput("ROI correlation matrix must have a unit diagonal")
    sigma, eigenvalues = project_psd(r)
    clipped = eigenvalues[eigenvalues < EIGEN_FLOOR]
    if clipped.size:
        log.info("ROI correlation: clipped eigenvalues %s to %g", clipped.tolist(), EIGEN_FLOOR)
    return sigma, eigenvalues


@lru_cache(maxsize=1)
def _frontal_factor() -> np.ndarray:
    sigma, _ = frontal_covariance()
    return mvn_factor(sigma)


@dataclass(frozen=True)
class AdniSimConfig:
    """Eight correlated ROI phenotypes, gender and age covariates, 141 loci."""

    n: int = 100
    a: float = 0.0
    maf: tuple[float, ...] | None = None
    beta: tuple[tuple[float, ...], ...] = ((1.0,) * 8, (1.0,) * 8)
    loading: tuple[float, ...] = (1.0,) * 8
    seed: int = 0
    q: int = field(default=141, init=False)
    p: int = field(default=8, init=False)

    def __post_init__(self):
        if self.n < 10:
            raise InvalidParameter(f"n must be >= 10, got {self.n}")
        if self.a < 0:
            raise InvalidParameter(f"a must be >= 0, got {self.a}")
        if self.maf is not None:
            _check_maf(self.maf, self.q)
        if np.shape(self.beta) != (2, self.p):
            raise InvalidParameter(f"beta must be 2x{self.p}")
        if np.shape(self.loading) != (self.p,):
            raise InvalidParameter(f"loading must have {self.p} entries")

    def canonical(self) -> "AdniSimConfig":
        return self

    @property
    def labels(self) -> dict:
        return {"a": self.a, "sigma": "roi", "effect": "h1"}


def adni_sim_generate(cfg: AdniSimConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Y (n,8), X (n,2), Z (n,141))``; ``X`` is (gender, standardized age)."""
    rng = np.random.default_rng(cfg.seed)
    maf = _check_maf(cfg.maf if cfg.maf is not None else draw_maf(cfg.seed, cfg.q), cfg.q)
    gender = rng.binomial(1, GENDER_PROBABILITY, size=cfg.n).astype(np.float64)
    age = rng.standard_normal(cfg.n)
    x = np.column_stack([gender, age])
    z = rng.binomial(2, maf, size=(cfg.n, cfg.q)).astype(np.float64)
    eps = rng.standard_normal((cfg.n, cfg.p)) @ _frontal_factor().T
    effect = cfg.a * h1(z[:, :5])
    y = x @ np.asarray(cfg.beta) + np.outer(effect, cfg.loading) + eps
    return y, x, z
