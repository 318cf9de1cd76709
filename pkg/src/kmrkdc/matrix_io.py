"""CSV matrix ingestion and emission.

Format: UTF-8, first row is a header, one sample per row, every row with
the same number of columns as the header.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import InvalidInput, ParseError

MatrixKind = Literal["phenotype", "genotype", "covariate", "real"]


def _parse_real(cell: str, line: int, col: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", line, col) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite cell {cell!r}", line, col)
    return v


def _parse_allele_count(cell: str, line: int, col: int) -> float:
    text = cell.strip()
    try:
        v = int(text)
    except ValueError:
        real = _parse_real(text, line, col)
        raise InvalidInput(
            f"genotype at row {line - 1}, column {col} is {real!r}; expected an integer 0, 1 or 2"
        ) from None
    if v not in (0, 1, 2):
        raise InvalidInput(
            f"genotype at row {line - 1}, column {col} is {v}; expected 0, 1 or 2"
        )
    return float(v)


def ingest_matrix(path, kind: MatrixKind = "phenotype") -> np.ndarray:
    """Read a CSV matrix and validate it for its role.

    Genotype cells must be the integers 0, 1 or 2. Errors name the 1-based
    file line (header is line 1) and column.
    """
    if kind not in ("phenotype", "genotype", "covariate", "real"):
        raise InvalidInput(f"unknown matrix kind {kind!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidInput(f"{path}: no such file") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    rows = list(csv.reader(text.splitlines()))
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise InvalidInput(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if not body:
        raise InvalidInput(f"{path}: header but no data rows")
    width = len(header)
    parse = _parse_allele_count if kind == "genotype" else _parse_real
    out = np.empty((len(body), width))
    for r, row in enumerate(body):
        line = r + 2
        if len(row) != width:
            raise ParseError(f"{path}: expected {width} fields, found {len(row)}", line)
        for c, cell in enumerate(row):
            out[r, c] = parse(cell, line, c + 1)
    return out


def format_real(v: float) -> str:
    """Shortest string that round-trips to the same double."""
    return repr(float(v))


def write_matrix(path, matrix, header: Sequence[str] | None = None, integers: bool = False) -> None:
    """Write a matrix as CSV; ``integers=True`` prints integral cells without a decimal point."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidInput("can only write 2-D matrices")
    if integers and not np.array_equal(a, np.round(a)):
        raise InvalidInput("integers=True but the matrix has non-integral entries")
    fmt = (lambda v: str(int(v))) if integers else format_real
    header = list(header) if header is not None else [f"v{j + 1}" for j in range(a.shape[1])]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in a:
            writer.writerow([fmt(v) for v in row])
