"""Kernel distance covariance / kernel machine regression association tests.

The statistic family is ``T = tr(K H L H) / n^2`` with ``H = I - 11'/n``.
With ``L = Y~ Y~'`` (linear kernel on covariate-adjusted phenotypes) it is
the variance-component score statistic of kernel machine regression, up to
the ``1/n^2`` factor; other choices of ``L`` give distance covariance
(``L2`` on both sides) or HSIC (reproducing kernels).

Inference is by permutation. Sample labels of ``K`` (rows and columns
jointly) are shuffled against the fixed centered ``L``; permutation ``b``
is drawn from the counter-based stream ``(seed, b)``, so results do not
depend on the number of workers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _engine
from .errors import InvalidInput, InvalidParameter, TooFewSamples, TooLarge
from .kernels import (
    LINEAR,
    KernelSpec,
    _mirror_upper,
    as_genotype_matrix,
    as_sample_matrix,
    as_square_matrix,
    double_center,
)
from .linreg import residualize
from .rng import check_seed

MAX_ENUMERATION_N = 8

# Permuted sums within this fraction of max|K| * sum|M| of the observed
# value count as ties (and therefore as extreme).
TIE_RTOL = 1e-12

Scheme = Literal["monte_carlo", "full_enumeration"]
Route = Literal["KDC", "KMR"]


@dataclass(frozen=True)
class PermutationPlan:
    """How to draw the permutation null.

    ``n_permutations`` is ignored by ``full_enumeration``, which visits all
    ``n!`` relabelings (identity included) and is allowed only for ``n <= 8``.
    """

    n_permutations: int = 10_000
    seed: int = 0
    scheme: Scheme = "monte_carlo"

    def __post_init__(self):
        if self.scheme not in ("monte_carlo", "full_enumeration"):
            raise InvalidParameter(f"unknown permutation scheme {self.scheme!r}")
        if self.scheme == "monte_carlo" and self.n_permutations < 1:
            raise InvalidParameter("n_permutations must be >= 1")
        try:
            check_seed(self.seed)
        except ValueError as exc:
            raise InvalidParameter(str(exc)) from None


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n_permutations: int
    seed: int
    method: str

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n_permutations": self.n_permutations,
            "seed": self.seed,
            "method": self.method,
        }


def _check_pair(k, l):
    k = as_square_matrix(k, "k")
    l = as_square_matrix(l, "l")
    if k.shape != l.shape:
        raise InvalidInput(f"k is {k.shape[0]}x{k.shape[0]} but l is {l.shape[0]}x{l.shape[0]}")
    for name, a in (("k", k), ("l", l)):
        if np.abs(a - a.T).max() > 1e-12 * max(1.0, np.abs(a).max()):
            raise InvalidInput(f"{name} is not symmetric")
    return k, l


def kdc_statistic(k, l) -> float:
    """``tr(K H L H) / n^2``, evaluated as ``<K, H L H> / n^2``."""
    k, l = _check_pair(k, l)
    n = k.shape[0]
    return float(np.sum(k * double_center(l))) / n**2


def centered_outer(y) -> np.ndarray:
    """``Yc Yc'`` with ``Yc`` the column-centered ``y`` (equals ``H y y' H``)."""
    y = as_sample_matrix(y, "y")
    yc = y - y.mean(axis=0)
    return _mirror_upper(yc @ yc.T)


def kmr_score(k, y_adj) -> float:
    """Kernel machine regression score ``tr(K H Y Y' H)``.

    Computed in score form, ``sum_k (y_k - ybar_k)' K (y_k - ybar_k)``;
    pass covariate-adjusted residuals to get the adjusted score.
    """
    k = as_square_matrix(k, "k")
    y = as_sample_matrix(y_adj, "y_adj")
    if y.shape[0] != k.shape[0]:
        raise InvalidInput(f"k is {k.shape[0]}x{k.shape[0]} but y has {y.shape[0]} rows")
    yc = y - y.mean(axis=0)
    return float(np.sum(yc * (k @ yc)))


def _tie_tolerance(k: np.ndarray, m: np.ndarray) -> float:
    return TIE_RTOL * float(np.abs(k).max()) * float(np.abs(m).sum())


def _all_permutations(n: int) -> np.ndarray:
    if n > MAX_ENUMERATION_N:
        raise TooLarge(f"full enumeration allowed for n <= {MAX_ENUMERATION_N}, got n={n}")
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def permutation_counts(
    k: np.ndarray,
    centered: list[np.ndarray],
    plan: PermutationPlan,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Observed raw sums and exceedance counts for several centered ``L`` at once.

    All matrices in ``centered`` share the permutations drawn for ``k``.
    Returns ``(observed, counts, n_evaluated)`` where ``observed[l]`` is
    ``<K, M_l>`` and ``counts[l]`` the number of permutations with a sum at
    least the observed one (ties included).
    """
    n = k.shape[0]
    if n < 3:
        raise TooFewSamples(f"permutation tests need n >= 3, got n={n}")
    w = _engine.upper_weights(centered)
    ident = np.arange(n, dtype=np.int64)[None, :]
    observed = _engine.explicit_sums(k, w, ident)[0]
    if plan.scheme == "full_enumeration":
        sums = _engine.explicit_sums(k, w, _all_permutations(n), workers)
    else:
        sums = _engine.random_sums(k, w, plan.seed, plan.n_permutations, workers)
    tol = np.array([_tie_tolerance(k, m) for m in centered])
    counts = np.sum(sums >= observed - tol, axis=0)
    return observed, counts, sums.shape[0]


def p_value_from_count(count: int, total: int, scheme: Scheme) -> float:
    if scheme == "full_enumeration":
        return count / total
    return (1 + count) / (1 + total)


def permutation_test(
    k,
    l,
    plan: PermutationPlan | None = None,
    *,
    workers: int = 1,
    method: str = "KDC",
) -> TestResult:
    """Permutation test of ``tr(K H L H) / n^2`` (upper tail).

    Monte Carlo p-values use the add-one estimator
    ``(1 + #{T_b >= T_obs}) / (1 + B)``.
    """
    plan = plan or PermutationPlan()
    k, l = _check_pair(k, l)
    n = k.shape[0]
    if n < 3:
        raise TooFewSamples(f"permutation tests need n >= 3, got n={n}")
    m = double_center(l)
    _, counts, total = permutation_counts(k, [m], plan, workers)
    return TestResult(
        statistic=float(np.sum(k * m)) / n**2,
        p_value=p_value_from_count(int(counts[0]), total, plan.scheme),
        n_permutations=total,
        seed=plan.seed if plan.scheme == "monte_carlo" else 0,
        method=method,
    )


def full_enumeration_test(k, l, *, method: str = "KDC") -> TestResult:
    """Exact permutation p-value ``#{pi : T_pi >= T_obs} / n!`` for ``n <= 8``."""
    k, l = _check_pair(k, l)
    if k.shape[0] > MAX_ENUMERATION_N:
        raise TooLarge(
            f"full enumeration allowed for n <= {MAX_ENUMERATION_N}, got n={k.shape[0]}"
        )
    return permutation_test(k, l, PermutationPlan(scheme="full_enumeration"), method=method)


def describe(route: Route, spec_k: KernelSpec, spec_l: KernelSpec, adjusted: bool) -> str:
    if route == "KMR":
        return f"KMR(K={spec_k.label}{',adjusted' if adjusted else ''})"
    return f"KDC(L={spec_l.label},K={spec_k.label}{',adjusted' if adjusted else ''})"


def build_genotype_kernel(z, spec_k: KernelSpec) -> np.ndarray:
    if spec_k.kind == "ibs":
        return spec_k.build(as_genotype_matrix(z))
    return spec_k.build(as_sample_matrix(z, "genotypes"))


def phenotype_centered(y_adj: np.ndarray, spec_l: KernelSpec, route: Route) -> np.ndarray:
    """Centered phenotype matrix ``M``: ``Yc Yc'`` for KMR, ``H L H`` for KDC."""
    if route == "KMR":
        return centered_outer(y_adj)
    return double_center(spec_l.build(y_adj))


def adjust_phenotypes(y, x) -> np.ndarray:
    """Residualize on ``[1, x]`` when covariates are given; raw ``y`` otherwise."""
    y = as_sample_matrix(y, "phenotypes")
    if x is None:
        return y
    return residualize(y, x).residuals


def run_test(
    y,
    z,
    x=None,
    spec_k: KernelSpec = LINEAR,
    spec_l: KernelSpec = LINEAR,
    plan: PermutationPlan | None = None,
    *,
    route: Route = "KDC",
    workers: int = 1,
) -> TestResult:
    """End-to-end association test between phenotypes ``y`` and genotypes ``z``.

    Parameters
    ----------
    y : (n, p) phenotypes.
    z : (n, q) genotypes or other predictors; must be 0/1/2 counts for IBS.
    x : (n, m) covariates, or None. When given, ``y`` is replaced by its
        least-squares residuals on ``[1, x]`` before ``L`` is built.
    spec_k, spec_l : kernels for the genotype and phenotype sides.
    route : ``"KMR"`` uses the score form ``Yc Yc'`` for the phenotype side
        and reports ``kmr_score / n^2``; ``spec_l`` is then ignored.
    """
    plan = plan or PermutationPlan()
    if route not in ("KDC", "KMR"):
        raise InvalidParameter(f"route must be 'KDC' or 'KMR', got {route!r}")
    y = as_sample_matrix(y, "phenotypes")
    z_arr = np.asarray(z, dtype=np.float64)
    n = y.shape[0]
    if z_arr.ndim < 1 or z_arr.shape[0] != n:
        raise InvalidInput(f"phenotypes have {n} rows, genotypes have {z_arr.shape[0] if z_arr.ndim else 0}")
    if n < 3:
        raise TooFewSamples(f"permutation tests need n >= 3, got n={n}")
    y_adj = adjust_phenotypes(y, x)
    k = build_genotype_kernel(z_arr, spec_k)
    m = phenotype_centered(y_adj, spec_l, route)
    _, counts, total = permutation_counts(k, [m], plan, workers)
    if route == "KMR":
        statistic = kmr_score(k, y_adj) / n**2
    else:
        statistic = float(np.sum(k * m)) / n**2
    return TestResult(
        statistic=statistic,
        p_value=p_value_from_count(int(counts[0]), total, plan.scheme),
        n_permutations=total,
        seed=plan.seed if plan.scheme == "monte_carlo" else 0,
        method=describe(route, spec_k, LINEAR if route == "KMR" else spec_l, x is not None),
    )
