class LabError(Exception):
    """Base class for every error raised by the lab."""


class ParameterError(LabError, ValueError):
    """Invalid bounds, exponents, shapes or mismatched provenance."""


class ConfigurationError(LabError):
    """A run cannot proceed as configured (e.g. unacknowledged truncation)."""


class DispatchError(LabError):
    """Regime mismatch or weights whose primitives are not strictly positive."""
