"""Exception hierarchy shared by every vicollage module."""

from __future__ import annotations


class VicollageError(Exception):
    """Base class for errors raised by vicollage."""


class DomainError(VicollageError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegreeOverflowError(VicollageError, ArithmeticError):
    """A polynomial piece would exceed the representable degree."""

    def __init__(self, degree: int, limit: int):
        super().__init__(f"piece degree {degree} exceeds the cap {limit}")
        self.degree = degree
        self.limit = limit


class FactorizationError(VicollageError, ArithmeticError):
    """Cholesky factorization failed; ``pivot`` is the 1-based leading minor that broke."""

    def __init__(self, pivot: int, size: int):
        super().__init__(
            f"matrix of size {size} is not positive definite "
            f"(leading minor {pivot} is not positive)"
        )
        self.pivot = pivot
        self.size = size


class SolverError(VicollageError, ArithmeticError):
    """A linear solve or its right-hand side failed a consistency check."""


class ConfigError(VicollageError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
