"""Exception hierarchy shared by the numerical modules and the CLI."""


class YamabeError(Exception):
    """Base class for all errors raised by :mod:`yamabe2`."""


class ValidationError(YamabeError, ValueError):
    """Input outside the domain of an operation."""


class ConfigurationError(YamabeError):
    """Solver configuration cannot produce an answer (e.g. bracket not found)."""


class AccuracyError(YamabeError, ArithmeticError):
    """A computed result failed its residual or tolerance check."""


class UnsupportedSpectrumError(YamabeError):
    """Spectrum requested for a manifold that only carries scalar data."""
