"""
PRIMERACE Errors

Exception hierarchy shared by the library and the CLI.

Every error carries an optional suggestion and error code so the CLI can
render it with an actionable tip.
"""

from typing import Optional


class PrimeRaceError(Exception):
    """
    Base class for all primerace errors.

    Attributes:
        message: Error message
        suggestion: Actionable suggestion for the user
        error_code: Optional error code for documentation reference
    """

    default_code: Optional[str] = None

    def __init__(self, message: str, suggestion: Optional[str] = None, error_code: Optional[str] = None):
        self.message = message
        self.suggestion = suggestion
        self.error_code = error_code or self.default_code
        super().__init__(message)


class DomainError(PrimeRaceError, ValueError):
    """Input outside the mathematical domain (non-unit residue, q < 3, r out of range...)."""

    default_code = "D001"


class PreconditionError(DomainError):
    """Input valid in general but outside the analytic regime an estimate needs."""

    default_code = "D002"


class ConstructionError(PrimeRaceError):
    """An explicit tuple construction could not produce distinct units mod q."""

    default_code = "C001"


class DegenerateContextError(PrimeRaceError):
    """Spectral data unusable for the requested estimate (e.g. covariance not positive definite)."""

    default_code = "S001"


class ConfigurationError(PrimeRaceError):
    """Invalid configuration value or out-of-range run parameter."""

    default_code = "E001"


class CacheFormatError(PrimeRaceError):
    """A cache or trace file is corrupt, truncated, or written for another key."""

    default_code = "F001"


class NumericalError(PrimeRaceError):
    """A numerical routine failed to reach its precision target."""

    default_code = "N001"


__all__ = [
    "PrimeRaceError",
    "DomainError",
    "PreconditionError",
    "ConstructionError",
    "DegenerateContextError",
    "ConfigurationError",
    "CacheFormatError",
    "NumericalError",
]
