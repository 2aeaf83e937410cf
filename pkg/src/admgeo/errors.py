"""Exception hierarchy shared across the package.

CLI exit codes and HTTP status codes are derived from these classes,
so new error types should subclass one of the three branches below.
"""
from __future__ import annotations


class AdmGeoError(Exception):
    """Base class for all package errors."""


class InputValidationError(AdmGeoError):
    """Caller supplied an argument outside the documented domain."""


class InvalidScoreError(InputValidationError):
    """Score vector violates its invariants (NaN, negative, all-zero...)."""


class MetricDomainError(InputValidationError):
    """Metric value outside its legal domain (accuracy [0,1], perplexity >= 1)."""


class EmptyPopulationError(InputValidationError):
    """Accuracy requested over zero predictions."""


class ProjectionWindowError(InputValidationError):
    """Point too far from the projection origin for the planar approximation."""


class QueryValidationError(InputValidationError):
    """Query references unknown ids/models or is structurally invalid."""


class NotFoundError(AdmGeoError):
    """Requested document does not exist."""


class ConflictError(AdmGeoError):
    """Write would collide with an existing document."""


class DatasetLoadError(AdmGeoError):
    """Dataset file is missing or corrupt; carries file and line context."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class OperationCancelled(AdmGeoError):
    """Long-running operation observed its cancellation signal."""
