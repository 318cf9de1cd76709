"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KMRKDCError(Exception):
    """Base class for all package errors."""


class InvalidInput(KMRKDCError, ValueError):
    """Input data violates a shape, range or finiteness requirement."""


class InvalidParameter(KMRKDCError, ValueError):
    """A tuning parameter is out of its admissible range."""


class ParseError(InvalidInput):
    """A CSV file could not be parsed.

    ``line`` is 1-based and counts the header; ``column`` is 1-based
    when known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class RankDeficient(KMRKDCError, ArithmeticError):
    """Design matrix does not have full column rank."""


class DegenerateFit(KMRKDCError, ArithmeticError):
    """A pseudo-F denominator vanished (perfect fit or zero matrix)."""


class TooFewSamples(InvalidInput):
    """Not enough samples for a permutation test."""


class TooLarge(InvalidParameter):
    """Full enumeration requested for too many samples."""
