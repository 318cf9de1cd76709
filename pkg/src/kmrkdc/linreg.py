"""Least-squares covariate adjustment and MANOVA-style pseudo-F statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import DegenerateFit, InvalidInput, InvalidParameter, RankDeficient
from .kernels import _mirror_upper, as_sample_matrix, as_square_matrix


@dataclass(frozen=True)
class FittedAdjustment:
    """Coefficients (intercept row first) and residuals of ``y`` on ``[1, x]``."""

    beta: np.ndarray
    residuals: np.ndarray


def _check_full_rank(r: np.ndarray, n: int, name: str) -> None:
    diag = np.abs(np.diag(r))
    tol = diag.max(initial=0.0) * max(n, r.shape[1]) * np.finfo(float).eps
    if diag.size == 0 or np.any(diag <= tol):
        raise RankDeficient(f"{name} does not have full column rank")


def design_matrix(x, n: int) -> np.ndarray:
    """Covariates with an all-ones column prepended. ``x=None`` gives intercept only."""
    if x is None:
        return np.ones((n, 1))
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InvalidInput(f"covariates must be 2-D, got shape {a.shape}")
    if a.shape[0] != n:
        raise InvalidInput(f"covariates have {a.shape[0]} rows, phenotypes have {n}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("covariates contain non-finite entries")
    return np.hstack([np.ones((n, 1)), a])


def residualize(y, x=None) -> FittedAdjustment:
    """Regress every column of ``y`` on ``[1, x]`` and return residuals.

    Solved through a QR factorization of the design. A rank-deficient
    design raises :class:`RankDeficient` rather than falling back to a
    pseudo-inverse.
    """
    y = as_sample_matrix(y, "phenotypes")
    n = y.shape[0]
    design = design_matrix(x, n)
    if n <= design.shape[1]:
        raise RankDeficient(
            f"need more samples ({n}) than design columns ({design.shape[1]})"
        )
    q, r = qr(design, mode="economic")
    _check_full_rank(r, n, "covariate design")
    beta = solve_triangular(r, q.T @ y)
    return FittedAdjustment(beta=beta, residuals=y - design @ beta)


def _orthonormal_basis(z: np.ndarray) -> np.ndarray:
    n, q = z.shape
    if n <= q:
        raise RankDeficient(f"need n > q, got n={n}, q={q}")
    basis, r = qr(z, mode="economic")
    _check_full_rank(r, n, "z")
    return basis


def hat_matrix(z) -> np.ndarray:
    """Orthogonal projector ``Z (Z'Z)^-1 Z'`` onto the column space of ``z``."""
    z = as_sample_matrix(z, "z")
    basis = _orthonormal_basis(z)
    return _mirror_upper(basis @ basis.T)


def _ratio(explained: float, residual: float, n: int, q: int, scale: float) -> float:
    if q < 2:
        raise InvalidParameter(f"pseudo-F needs q >= 2 predictor columns, got {q}")
    # a general symmetric d can give a negative residual trace; only zero is fatal
    if abs(residual) <= 1e-13 * scale:
        raise DegenerateFit("residual trace is zero; pseudo-F is undefined")
    return (explained / (q - 1)) / (residual / (n - q))


def pseudo_f(y, z) -> float:
    """Pseudo-F ratio of the projected to the residual sum of squares of ``y``."""
    y = as_sample_matrix(y, "y")
    z = as_sample_matrix(z, "z")
    if y.shape[0] != z.shape[0]:
        raise InvalidInput("y and z have different sample counts")
    n, q = z.shape
    if q < 2:
        raise InvalidParameter(f"pseudo-F needs q >= 2 predictor columns, got {q}")
    basis = _orthonormal_basis(z)
    coef = basis.T @ y
    fitted = basis @ coef
    explained = float(np.sum(coef * coef))
    residual = float(np.sum((y - fitted) ** 2))
    return _ratio(explained, residual, n, q, float(np.sum(y * y)))


def pseudo_f_distance(d, z) -> float:
    """Pseudo-F with ``YY'`` replaced by an arbitrary symmetric ``n x n`` matrix."""
    d = as_square_matrix(d, "d")
    z = as_sample_matrix(z, "z")
    if d.shape[0] != z.shape[0]:
        raise InvalidInput("d and z have different sample counts")
    n, q = z.shape
    if q < 2:
        raise InvalidParameter(f"pseudo-F needs q >= 2 predictor columns, got {q}")
    hat = hat_matrix(z)
    # tr(HDH) = tr(HD) for a symmetric idempotent H
    explained = float(np.sum(hat * d))
    residual = float(np.trace(d)) - explained
    return _ratio(explained, residual, n, q, float(np.abs(d).sum()))
