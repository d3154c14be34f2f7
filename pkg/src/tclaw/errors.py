"""Exception types shared across the package."""

from __future__ import annotations


class TclawError(Exception):
    """Base class for package errors."""


class ParseError(TclawError, ValueError):
    """Malformed circuit text.  Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NotFoundError(TclawError, RuntimeError):
    """No decomposition found up to the configured T-count ceiling.

    Carries ``report``, one entry per attempted count with the engine used
    and the work spent, so a caller can tell exhausted counts from walked
    ones.  Maps to exit code 1 in the command-line interface.
    """

    def __init__(self, message: str, report: list[dict]):
        super().__init__(message)
        self.report = report


class ConsistencyError(TclawError, RuntimeError):
    """An internal invariant failed.

    Raised when two representations that must agree do not, e.g. a pair of
    equal coset labels whose quotient is not a signed permutation, or a
    tableau that does not reproduce its source matrix.  Maps to exit code 3
    in the command-line interface.
    """


class StoreCorruptionError(ConsistencyError):
    """Two trails recorded as colliding failed to merge when replayed."""
