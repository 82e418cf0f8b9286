"""Exception types raised by the numeric and scenario layers."""
from typing import Optional


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class AccuracyError(ArithmeticError):
    """A quadrature did not reach the requested tolerance.

    The best available estimate is kept so callers can decide whether it is
    good enough for their purpose.
    """

    def __init__(self, message: str, best_estimate: float, error_estimate: float = float("nan")):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class ScenarioError(ValueError):
    """Malformed scenario file, override or sweep definition."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(location)})" if location else message)
        self.field = field
        self.line = line
