"""Exception types raised across the package."""


class DLCZError(Exception):
    """Base class for all errors raised by :mod:`dlcz`."""


class ParameterError(DLCZError, ValueError):
    """A physical parameter lies outside its admissible range."""


class NotPositiveDefiniteError(DLCZError, ValueError):
    """Matrix not positive definite."""


class UndefinedFidelityError(DLCZError, ZeroDivisionError):
    """A fidelity was requested for an event that cannot occur (0/0)."""


class ZeroProbabilityError(DLCZError, ZeroDivisionError):
    """A measurement outcome has zero probability; the post-state is undefined."""


class ConfigError(DLCZError, ValueError):
    """Malformed scenario configuration."""


class TruncationWarning(UserWarning):
    """Fock truncation is too shallow for the requested tolerance."""
