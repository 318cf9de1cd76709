"""Command-line front end.

Exit codes: 0 success, 2 usage / parse / validation error, 3 numerical
degeneracy (rank-deficient covariates, degenerate fit).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .assoc import PermutationPlan, TestResult, run_test
from .errors import DegenerateFit, InvalidInput, KMRKDCError, RankDeficient
from .kernels import KernelSpec
from .matrix_io import format_real, ingest_matrix, write_matrix
from .simgen.generators import AdniSimConfig, Sim1Config, Sim2Config, draw_maf
from .simgen.study import GENERATORS, default_methods, run_study

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("kmrkdc")


def _kernel_arg(text: str) -> KernelSpec:
    try:
        return KernelSpec.parse(text)
    except KMRKDCError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed_arg(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def format_test_result(result: TestResult, fmt: str) -> str:
    if fmt == "json":
        doc = result.as_dict()
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["statistic", "p_value", "n_permutations", "seed", "method"])
    writer.writerow(
        [format_real(result.statistic), format_real(result.p_value),
         result.n_permutations, result.seed, result.method]
    )
    return buf.getvalue()


def drop_constant_columns(x: np.ndarray) -> np.ndarray:
    """Remove covariate columns that duplicate the intercept.

    The adjustment design always carries an intercept, so a constant column
    leaves the column space (and the residuals) unchanged.
    """
    keep = ~np.all(x == x[:1], axis=0)
    if not keep.all():
        dropped = [int(j) + 1 for j in np.flatnonzero(~keep)]
        log.warning("dropping constant covariate column(s) %s; absorbed by the intercept", dropped)
    return x[:, keep]


def cmd_test(args) -> int:
    y = ingest_matrix(args.phenotypes, "phenotype")
    genotype_kind = "genotype" if args.kernel_k.kind == "ibs" else "real"
    z = ingest_matrix(args.genotypes, genotype_kind)
    x = ingest_matrix(args.covariates, "covariate") if args.covariates else None
    n = y.shape[0]
    if z.shape[0] != n:
        raise InvalidInput(f"phenotypes have {n} samples but genotypes have {z.shape[0]}")
    if x is not None and x.shape[0] != n:
        raise InvalidInput(f"phenotypes have {n} samples but covariates have {x.shape[0]}")
    if x is not None:
        x = drop_constant_columns(x)
    plan = PermutationPlan(n_permutations=args.permutations, seed=args.seed)
    result = run_test(
        y, z, x, args.kernel_k, args.kernel_l, plan,
        route=args.route.upper(), workers=args.threads,
    )
    _emit(format_test_result(result, args.format), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    study = args.study_flag or args.study
    if study is None:
        raise _UsageError("a study is required (sim1, sim2 or adni)")
    if args.study_flag and args.study and args.study_flag != args.study:
        raise _UsageError(f"conflicting studies {args.study!r} and {args.study_flag!r}")
    cell_kw = {}
    if study == "sim2":
        if args.effect:
            cell_kw["effects"] = tuple(args.effect)
        if args.sigma:
            cell_kw["sigmas"] = tuple(args.sigma)
    elif args.effect or args.sigma:
        raise _UsageError("--effect and --sigma apply to sim2 only")
    if args.n is not None:
        cell_kw["n"] = args.n
    methods = default_methods(study, include_unadjusted=args.include_unadjusted)
    result = run_study(
        study,
        a_values=args.a,
        methods=methods,
        reps=args.reps,
        perms=args.perms,
        alpha=args.alpha,
        seed=args.seed,
        workers=args.threads,
        **cell_kw,
    )
    if args.format == "json":
        text = result.to_json()
    elif args.format == "table":
        text = result.table()
    else:
        text = result.to_csv()
    _emit(text, args.out)
    return EXIT_OK


def cmd_kernel(args) -> int:
    kind = "genotype" if args.kernel.kind == "ibs" else "real"
    data = ingest_matrix(args.input, kind)
    k = args.kernel.build(data)
    write_matrix(args.out, k, header=[str(i) for i in range(k.shape[0])])
    return EXIT_OK


def cmd_simdata(args) -> int:
    """Write one simulated dataset as phenotypes/genotypes/covariates CSVs."""
    study = args.study
    if study == "sim1":
        cfg = Sim1Config(a=args.a_value, seed=args.seed, **({"n": args.n} if args.n else {}))
    elif study == "sim2":
        cfg = Sim2Config(a=args.a_value, seed=args.seed, effect=args.effect or "sparse",
                         sigma=args.sigma or "independent", maf=draw_maf(args.seed, 9),
                         **({"n": args.n} if args.n else {}))
    else:
        cfg = AdniSimConfig(a=args.a_value, seed=args.seed, maf=draw_maf(args.seed, 141),
                            **({"n": args.n} if args.n else {}))
    y, x, z = GENERATORS[study](replace(cfg))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_matrix(outdir / "phenotypes.csv", y, [f"y{j + 1}" for j in range(y.shape[1])])
    write_matrix(outdir / "covariates.csv", x, [f"x{j + 1}" for j in range(x.shape[1])])
    write_matrix(outdir / "genotypes.csv", z, [f"z{j + 1}" for j in range(z.shape[1])],
                 integers=study != "sim1")
    return EXIT_OK


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmrkdc",
        description="Kernel machine regression / kernel distance covariance association tests.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    kernel_help = "linear | quadratic | ibs | l2 | gower | rbf:<rho> | poly:<c>:<d>"

    t = sub.add_parser("test", help="permutation test on CSV inputs")
    t.add_argument("--phenotypes", required=True)
    t.add_argument("--genotypes", required=True)
    t.add_argument("--covariates")
    t.add_argument("--kernel-k", type=_kernel_arg, default=KernelSpec("linear"), help=kernel_help)
    t.add_argument("--kernel-l", type=_kernel_arg, default=KernelSpec("linear"), help=kernel_help)
    t.add_argument("--route", choices=("kdc", "kmr"), default="kdc",
                   help="kmr: score form on the phenotype side (kernel-l ignored)")
    t.add_argument("--permutations", type=_positive_int, default=10_000)
    t.add_argument("--seed", type=_seed_arg, required=True)
    t.add_argument("--format", choices=("csv", "json"), default="csv")
    t.add_argument("--threads", type=_positive_int, default=1)
    t.add_argument("--out", help="output path (default stdout)")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="size/power study")
    s.add_argument("study", nargs="?", choices=sorted(GENERATORS))
    s.add_argument("--study", dest="study_flag", choices=sorted(GENERATORS))
    s.add_argument("--effect", choices=("sparse", "common"), action="append")
    s.add_argument("--sigma", choices=("independent", "dependent"), action="append")
    s.add_argument("--a", type=_float_list, help="comma-separated effect sizes")
    s.add_argument("--n", type=_positive_int, help="sample size override")
    s.add_argument("--reps", type=_positive_int, default=1000)
    s.add_argument("--perms", type=_positive_int, default=10_000)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--include-unadjusted", action="store_true",
                   help="also run every method on unadjusted phenotypes")
    s.add_argument("--seed", type=_seed_arg, required=True)
    s.add_argument("--format", choices=("csv", "json", "table"), default="csv")
    s.add_argument("--threads", type=_positive_int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("kernel", help="export a kernel matrix")
    k.add_argument("--input", required=True)
    k.add_argument("--kernel", type=_kernel_arg, required=True, help=kernel_help)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_kernel)

    d = sub.add_parser("simdata", help="write one simulated dataset as CSV files")
    d.add_argument("--study", choices=sorted(GENERATORS), required=True)
    d.add_argument("--a", dest="a_value", type=float, default=0.0)
    d.add_argument("--n", type=_positive_int)
    d.add_argument("--effect", choices=("sparse", "common"))
    d.add_argument("--sigma", choices=("independent", "dependent"))
    d.add_argument("--seed", type=_seed_arg, required=True)
    d.add_argument("--outdir", required=True)
    d.set_defaults(func=cmd_simdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kmrkdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RankDeficient, DegenerateFit) as exc:
        print(f"kmrkdc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KMRKDCError as exc:
        print(f"kmrkdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"kmrkdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
