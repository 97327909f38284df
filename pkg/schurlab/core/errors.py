"""Exception hierarchy for schurlab."""

from typing import Any


class SchurLabError(Exception):
    """Base exception for all schurlab errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.details = details or {}


class InvalidExponentError(SchurLabError):
    """Exponent p outside the admissible range."""


class DimensionError(SchurLabError):
    """Shapes, index sets or Hilbert dimensions do not match."""


class NotPSDError(SchurLabError):
    """Matrix is not Hermitian positive semidefinite within tolerance."""


class FactorizationError(NotPSDError):
    """Gram matrix could not be factored for gaussian sampling."""


class ContractionError(SchurLabError):
    """An operator expected to be a contraction has norm above 1 + tol."""


class PreconditionError(SchurLabError):
    """Generic violated precondition (non-unit vectors, degenerate pairs, ...)."""


class SupportError(PreconditionError):
    """Matrix has entries on the diagonal set {u_j = u_k}."""


class UndefinedRatioError(PreconditionError):
    """Ratio requested against a zero denominator."""


class MonotonicityError(SchurLabError):
    """Function table is decreasing somewhere."""


class DecompositionError(SchurLabError):
    """Symbol rows cannot be decomposed (complex or non-finite entries)."""


class PartitionError(SchurLabError):
    """Block family is not pairwise disjoint or misses a symbol."""


class ResolutionError(SchurLabError):
    """Grid too coarse for the requested finite-difference order."""


class UnknownConstructionError(SchurLabError):
    """Symbol construction tag not known to the lab."""


class UnknownSuiteError(SchurLabError):
    """Suite name not in the registry."""


class ConfigError(SchurLabError):
    """Invalid suite configuration."""


class ReportIOError(SchurLabError):
    """Report could not be written or read."""
