"""Size/power study driver.

A study is a list of data-generating configs (grid cells) crossed with a
list of test methods. Replicate ``r`` of every cell uses the seed
``replicate_seed(seed, r)`` both for data generation and for the
permutation stream, so all methods within a replicate see the same data
and the same permutations, and cells that differ only in ``a`` share
their random numbers.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

from ..assoc import (
    PermutationPlan,
    Route,
    adjust_phenotypes,
    build_genotype_kernel,
    describe,
    p_value_from_count,
    permutation_counts,
    phenotype_centered,
)
from ..errors import InvalidParameter
from ..kernels import IBS, L2, LINEAR, QUADRATIC, KernelSpec
from ..rng import check_seed, replicate_seed
from .generators import (
    AdniSimConfig,
    Sim1Config,
    Sim2Config,
    adni_sim_generate,
    draw_maf,
    frontal_covariance,
    sim1_generate,
    sim2_generate,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Method:
    """One row of a results table: route, kernels, and covariate handling."""

    route: Route
    kernel_k: KernelSpec
    kernel_l: KernelSpec = LINEAR
    adjusted: bool = True

    def __post_init__(self):
        if self.route not in ("KDC", "KMR"):
            raise InvalidParameter(f"route must be 'KDC' or 'KMR', got {self.route!r}")
        if self.route == "KMR" and self.kernel_l != LINEAR:
            raise InvalidParameter("KMR methods use the linear phenotype kernel")

    @property
    def label(self) -> str:
        return describe(self.route, self.kernel_k, self.kernel_l, self.adjusted)

    def unadjusted(self) -> "Method":
        return replace(self, adjusted=False)


def kmr(k: KernelSpec, adjusted: bool = True) -> Method:
    return Method("KMR", k, LINEAR, adjusted)


def kdc(l: KernelSpec, k: KernelSpec, adjusted: bool = True) -> Method:
    return Method("KDC", k, l, adjusted)


# row order follows the published tables
TABLE1_METHODS = (
    kmr(LINEAR),
    kmr(QUADRATIC),
    kdc(L2, L2),
    kdc(LINEAR, LINEAR),
    kdc(LINEAR, QUADRATIC),
    kdc(QUADRATIC, LINEAR),
    kdc(QUADRATIC, QUADRATIC),
)

GENOTYPE_METHODS = (
    kmr(LINEAR),
    kmr(QUADRATIC),
    kmr(IBS),
    kdc(L2, L2),
    kdc(LINEAR, LINEAR),
    kdc(LINEAR, QUADRATIC),
    kdc(LINEAR, IBS),
    kdc(QUADRATIC, LINEAR),
    kdc(QUADRATIC, QUADRATIC),
    kdc(QUADRATIC, IBS),
)

RBF_RHOS = (0.1, 0.5, 1.0, 5.0, 10.0)
RBF_METHODS = tuple(
    kdc(KernelSpec("rbf", rho=rho), k) for rho in RBF_RHOS for k in (LINEAR, QUADRATIC, IBS)
)

STUDY_DEFAULTS = {
    "sim1": {"a": (0.0, 0.25, 0.5, 0.75, 1.0), "n": 60},
    "sim2": {"a": (0.0, 0.1, 0.2), "n": 100},
    "adni": {"a": (0.0, 0.05, 0.1), "n": 100},
}

GENERATORS: dict[str, Callable] = {
    "sim1": sim1_generate,
    "sim2": sim2_generate,
    "adni": adni_sim_generate,
}


@dataclass
class StudyCell:
    method: Method
    a: float
    sigma: str
    effect: str
    rejections: int
    reps: int

    @property
    def rate(self) -> float:
        return self.rejections / self.reps


CSV_COLUMNS = (
    "method",
    "kernel_k",
    "kernel_l",
    "adjusted",
    "a",
    "sigma",
    "effect",
    "rejection_rate",
    "R",
    "B",
    "seed",
)


@dataclass
class StudyResult:
    study: str
    cells: list[StudyCell]
    reps: int
    perms: int
    alpha: float
    seed: int
    config: dict = field(default_factory=dict)

    def rate(self, method: Method, a: float, sigma: str | None = None, effect: str | None = None) -> float:
        """Rejection rate of one cell; omitted labels match any value but must be unambiguous."""
        hits = [
            c for c in self.cells
            if c.method == method and c.a == a
            and (sigma is None or c.sigma == sigma)
            and (effect is None or c.effect == effect)
        ]
        if not hits:
            raise KeyError((method.label, a, sigma, effect))
        if len({(c.sigma, c.effect) for c in hits}) > 1:
            raise KeyError(f"{method.label} at a={a} matches several cells; give sigma and effect")
        return hits[0].rate

    def rows(self) -> list[dict]:
        return [
            {
                "method": c.method.route,
                "kernel_k": c.method.kernel_k.label,
                "kernel_l": c.method.kernel_l.label,
                "adjusted": c.method.adjusted,
                "a": c.a,
                "sigma": c.sigma,
                "effect": c.effect,
                "rejection_rate": c.rate,
                "R": self.reps,
                "B": self.perms,
                "seed": self.seed,
            }
            for c in self.cells
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            row = dict(row)
            row["adjusted"] = "true" if row["adjusted"] else "false"
            row["a"] = repr(float(row["a"]))
            row["rejection_rate"] = repr(float(row["rejection_rate"]))
            writer.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "study": self.study,
            "R": self.reps,
            "B": self.perms,
            "alpha": self.alpha,
            "seed": self.seed,
            "config": self.config,
            "cells": self.rows(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        """Human-readable grid: one line per method, one column per cell."""
        keys = []
        for c in self.cells:
            key = (c.effect, c.sigma, c.a)
            if key not in keys:
                keys.append(key)
        methods = []
        for c in self.cells:
            if c.method not in methods:
                methods.append(c.method)
        heads = ["/".join(str(v) for v in (e, s) if v) + f" a={a:g}" for e, s, a in keys]
        width = max(len(m.label) for m in methods)
        lines = [" " * width + "  " + "  ".join(f"{h:>{max(8, len(h))}}" for h in heads)]
        lookup = {(c.method, c.effect, c.sigma, c.a): c.rate for c in self.cells}
        for m in methods:
            vals = []
            for h, key in zip(heads, keys):
                rate = lookup.get((m, *key))
                cell = "" if rate is None else f"{rate:.6g}"
                vals.append(f"{cell:>{max(8, len(h))}}")
            lines.append(f"{m.label:<{width}}  " + "  ".join(vals))
        return "\n".join(lines) + "\n"


def _config_dict(cfg) -> dict:
    d = asdict(cfg)
    d.pop("seed", None)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def _replicate_pvalues(data, methods: Sequence[Method], plan: PermutationPlan, workers: int) -> dict:
    """p-values of every method on one dataset; methods sharing ``K`` share one pass."""
    y, x, z = data
    adjusted = {}
    groups: dict[KernelSpec, list[Method]] = {}
    for m in methods:
        groups.setdefault(m.kernel_k, []).append(m)
    out = {}
    for spec_k, group in groups.items():
        k = build_genotype_kernel(z, spec_k)
        centered = []
        for m in group:
            if m.adjusted not in adjusted:
                adjusted[m.adjusted] = adjust_phenotypes(y, x if m.adjusted else None)
            centered.append(phenotype_centered(adjusted[m.adjusted], m.kernel_l, m.route))
        _, counts, total = permutation_counts(k, centered, plan, workers)
        for m, c in zip(group, counts):
            out[m] = p_value_from_count(int(c), total, plan.scheme)
    return out


def size_power_study(
    dgp: str | Callable,
    cells: Iterable,
    methods: Sequence[Method],
    reps: int = 1000,
    perms: int = 10_000,
    alpha: float = 0.05,
    seed: int = 0,
    *,
    workers: int = 1,
    study: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> StudyResult:
    """Empirical rejection rates of ``methods`` over the grid ``cells``.

    Parameters
    ----------
    dgp : generator name (``sim1``, ``sim2``, ``adni``) or a callable
        mapping a config to ``(Y, X, Z)``.
    cells : configs, one per grid cell; their ``seed`` is overwritten
        per replicate.
    reps, perms : replicate and permutation counts (R >= 1, B >= 100).
    alpha : rejection level; a replicate rejects when ``p <= alpha``.
    """
    if reps < 1:
        raise InvalidParameter(f"reps must be >= 1, got {reps}")
    if perms < 100:
        raise InvalidParameter(f"perms must be >= 100, got {perms}")
    if not 0 < alpha < 1:
        raise InvalidParameter(f"alpha must be in (0, 1), got {alpha}")
    seed = check_seed(seed)
    name = dgp if isinstance(dgp, str) else (study or getattr(dgp, "__name__", "custom"))
    generate = GENERATORS[dgp] if isinstance(dgp, str) else dgp
    cells = list(cells)
    methods = list(dict.fromkeys(methods))

    unique: dict = {}
    for cfg in cells:
        unique.setdefault(cfg.canonical(), None)
    counts = {key: {m: 0 for m in methods} for key in unique}
    started = time.perf_counter()
    for r in range(reps):
        rseed = replicate_seed(seed, r)
        plan = PermutationPlan(n_permutations=perms, seed=rseed)
        for key in unique:
            data = generate(replace(key, seed=rseed))
            pvals = _replicate_pvalues(data, methods, plan, workers)
            for m, p in pvals.items():
                counts[key][m] += p <= alpha
        if progress is not None:
            progress(r + 1, reps)
        if (r + 1) % 100 == 0:
            log.info("%s: %d/%d replicates (%.1fs)", name, r + 1, reps, time.perf_counter() - started)

    result_cells = []
    for cfg in cells:
        labels = cfg.labels
        for m in methods:
            result_cells.append(
                StudyCell(m, labels["a"], labels["sigma"], labels["effect"],
                          int(counts[cfg.canonical()][m]), reps)
            )
    config = {
        "dgp": name,
        "cells": [_config_dict(c) for c in cells],
        "methods": [m.label for m in methods],
    }
    return StudyResult(name, result_cells, reps, perms, alpha, seed, config)


def sim1_cells(a_values=STUDY_DEFAULTS["sim1"]["a"], n: int = 60, beta0: float = 0.0, beta: float = 1.0):
    return [Sim1Config(n=n, a=a, beta0=beta0, beta=beta) for a in a_values]


def sim2_cells(
    a_values=STUDY_DEFAULTS["sim2"]["a"],
    effects=("sparse", "common"),
    sigmas=("independent", "dependent"),
    n: int = 100,
    seed: int = 0,
    maf=None,
):
    maf = tuple(maf) if maf is not None else draw_maf(seed, 9)
    return [
        Sim2Config(n=n, a=a, effect=e, sigma=s, maf=maf)
        for e in effects
        for s in sigmas
        for a in a_values
    ]


def adni_cells(a_values=STUDY_DEFAULTS["adni"]["a"], n: int = 100, seed: int = 0, maf=None):
    maf = tuple(maf) if maf is not None else draw_maf(seed, 141)
    return [AdniSimConfig(n=n, a=a, maf=maf) for a in a_values]


def default_cells(study: str, a_values=None, seed: int = 0, **kw):
    """Grid cells for a named study with the published defaults."""
    a_values = tuple(a_values) if a_values is not None else STUDY_DEFAULTS[study]["a"]
    if study == "sim1":
        return sim1_cells(a_values, **kw)
    if study == "sim2":
        return sim2_cells(a_values, seed=seed, **kw)
    if study == "adni":
        return adni_cells(a_values, seed=seed, **kw)
    raise InvalidParameter(f"unknown study {study!r}")


def default_methods(study: str, include_unadjusted: bool = False) -> list[Method]:
    base = list(TABLE1_METHODS if study == "sim1" else GENOTYPE_METHODS)
    if include_unadjusted:
        base += [m.unadjusted() for m in base]
    return base


def run_study(
    study: str,
    a_values=None,
    methods: Sequence[Method] | None = None,
    reps: int = 1000,
    perms: int = 10_000,
    alpha: float = 0.05,
    seed: int = 0,
    workers: int = 1,
    **cell_kw,
) -> StudyResult:
    """Named study with published defaults (R=1000, B=10^4, alpha=0.05)."""
    if study not in GENERATORS:
        raise InvalidParameter(f"unknown study {study!r}; choose sim1, sim2 or adni")
    cells = default_cells(study, a_values, seed=seed, **cell_kw)
    result = size_power_study(
        study, cells, methods or default_methods(study), reps, perms, alpha, seed, workers=workers
    )
    if study == "adni":
        _, eigenvalues = frontal_covariance()
        result.config["roi_correlation_eigenvalues"] = eigenvalues.tolist()
    return result
