"""Pairwise kernel and distance matrices, double centering, Gower conversion.

All constructors return plain ``numpy`` arrays of shape ``(n, n)`` that are
exactly symmetric: one triangle is computed and mirrored onto the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InvalidInput, InvalidParameter

KernelKind = Literal["ibs", "l2", "rbf", "poly", "linear", "quadratic", "gower"]


def _mirror_upper(a: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one, in place."""
    il = np.tril_indices(a.shape[0], -1)
    a[il] = a.T[il]
    return a


def as_sample_matrix(x, name: str = "x") -> np.ndarray:
    """Validate and coerce to a 2-D float array with at least two rows."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InvalidInput(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 2:
        raise InvalidInput(f"{name} needs at least 2 samples, got {a.shape[0]}")
    if a.shape[1] < 1:
        raise InvalidInput(f"{name} needs at least 1 column")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return a


def as_genotype_matrix(g, name: str = "genotypes") -> np.ndarray:
    """Validate minor-allele counts in {0, 1, 2}; returns a float array."""
    a = as_sample_matrix(g, name)
    bad = ~np.isin(a, (0.0, 1.0, 2.0))
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidInput(
            f"{name}[{i}, {j}] = {a[i, j]!r} is not a minor-allele count in {{0, 1, 2}}"
        )
    return a


def as_square_matrix(k, name: str = "k") -> np.ndarray:
    a = np.asarray(k, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return a


def pairwise_sq_dist(x) -> np.ndarray:
    """Squared Euclidean distances between the rows of ``x``."""
    a = as_sample_matrix(x)
    return squareform(pdist(a, "sqeuclidean"))


def l2_distance_kernel(x) -> np.ndarray:
    """Euclidean distance matrix, used as-is (it is not PSD)."""
    a = as_sample_matrix(x)
    return squareform(pdist(a, "euclidean"))


def ibs_kernel(g) -> np.ndarray:
    """Identity-by-state similarity: mean shared allele count per locus, in [0, 1]."""
    a = as_genotype_matrix(g)
    q = a.shape[1]
    mismatch = squareform(pdist(a, "cityblock"))
    return (2.0 * q - mismatch) / (2.0 * q)


def gaussian_rbf_kernel(x, rho: float) -> np.ndarray:
    """``exp(-rho * ||x_i - x_j||^2)``. ``rho`` has no default on purpose."""
    if not (np.isfinite(rho) and rho > 0):
        raise InvalidParameter(f"rho must be a positive finite number, got {rho!r}")
    return np.exp(-rho * pairwise_sq_dist(x))


def polynomial_kernel(x, c: float = 0.0, d: int = 1) -> np.ndarray:
    """``(<x_i, x_j> + c) ** d``."""
    if int(d) != d or d < 1:
        raise InvalidParameter(f"degree d must be a positive integer, got {d!r}")
    if not np.isfinite(c):
        raise InvalidParameter(f"offset c must be finite, got {c!r}")
    a = as_sample_matrix(x)
    gram = _mirror_upper(a @ a.T)
    out = gram + float(c)
    if d != 1:
        out = out ** int(d)
    return out


def linear_kernel(x) -> np.ndarray:
    return polynomial_kernel(x, 0.0, 1)


def quadratic_kernel(x) -> np.ndarray:
    return polynomial_kernel(x, 1.0, 2)


def double_center(k) -> np.ndarray:
    """Return ``H k H`` with ``H = I - 11'/n``.

    Row means are removed, then column means; ``H`` is never formed.
    The result is symmetrized by mirroring its upper triangle.
    """
    a = as_square_matrix(k)
    out = a - a.mean(axis=1, keepdims=True)
    out -= out.mean(axis=0, keepdims=True)
    return _mirror_upper(out)


def gower_from_sq_dist(d2) -> np.ndarray:
    """Gower centered matrix ``-1/2 H d2 H`` from squared distances."""
    a = as_square_matrix(d2, "d2")
    if np.any(np.diag(a) != 0):
        raise InvalidInput("squared-distance matrix must have a zero diagonal")
    if np.any(a < 0):
        raise InvalidInput("squared-distance matrix has negative entries")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise InvalidInput("squared-distance matrix is not symmetric")
    return -0.5 * double_center(a)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel choice plus its parameters.

    ``linear`` and ``quadratic`` are aliases of ``poly`` with
    ``(c, d) = (0, 1)`` and ``(1, 2)`` and build bit-identical matrices.
    """

    kind: KernelKind
    rho: float | None = None
    c: float = field(default=0.0)
    d: int = field(default=1)

    def __post_init__(self):
        if self.kind not in ("ibs", "l2", "rbf", "poly", "linear", "quadratic", "gower"):
            raise InvalidParameter(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.rho is None or not (np.isfinite(self.rho) and self.rho > 0):
                raise InvalidParameter("rbf kernel requires rho > 0")
        if self.kind == "poly":
            if int(self.d) != self.d or self.d < 1:
                raise InvalidParameter("poly kernel requires integer d >= 1")
            if not np.isfinite(self.c) or self.c < 0:
                raise InvalidParameter("poly kernel requires finite c >= 0")

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse ``linear | quadratic | ibs | l2 | gower | rbf:<rho> | poly:<c>:<d>``."""
        parts = text.strip().lower().split(":")
        head, args = parts[0], parts[1:]
        try:
            if head in ("linear", "quadratic", "ibs", "l2", "gower") and not args:
                return cls(head)
            if head == "rbf" and len(args) == 1:
                return cls("rbf", rho=float(args[0]))
            if head == "poly" and len(args) == 2:
                d = float(args[1])
                if d != int(d):
                    raise InvalidParameter(f"poly degree must be an integer, got {args[1]!r}")
                return cls("poly", c=float(args[0]), d=int(d))
        except ValueError as exc:
            if isinstance(exc, InvalidParameter):
                raise
            raise InvalidParameter(f"bad kernel spec {text!r}: {exc}") from None
        raise InvalidParameter(
            f"bad kernel spec {text!r}; expected linear, quadratic, ibs, l2, gower, "
            "rbf:<rho> or poly:<c>:<d>"
        )

    @property
    def label(self) -> str:
        if self.kind == "rbf":
            return f"rbf:{self.rho:g}"
        if self.kind == "poly":
            return f"poly:{self.c:g}:{self.d}"
        return self.kind

    def __str__(self) -> str:
        return self.label

    def build(self, x) -> np.ndarray:
        """Kernel (or distance) matrix for the rows of ``x``."""
        if self.kind == "ibs":
            return ibs_kernel(x)
        if self.kind == "l2":
            return l2_distance_kernel(x)
        if self.kind == "rbf":
            return gaussian_rbf_kernel(x, self.rho)
        if self.kind == "linear":
            return polynomial_kernel(x, 0.0, 1)
        if self.kind == "quadratic":
            return polynomial_kernel(x, 1.0, 2)
        if self.kind == "poly":
            return polynomial_kernel(x, self.c, self.d)
        return gower_from_sq_dist(pairwise_sq_dist(x))


LINEAR = KernelSpec("linear")
QUADRATIC = KernelSpec("quadratic")
IBS = KernelSpec("ibs")
L2 = KernelSpec("l2")
