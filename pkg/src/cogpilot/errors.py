"""Exception hierarchy shared by all cogpilot modules."""


class CogPilotError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(CogPilotError, ValueError):
    pass


class InvalidParameterError(CogPilotError, ValueError):
    pass


class NumericalDomainError(CogPilotError, ArithmeticError):
    """Input violates a numerical precondition (e.g. a non-PSD covariance)."""


class UndefinedMetricError(CogPilotError, ValueError):
    pass


class InvalidBasisError(CogPilotError, ValueError):
    pass


class ConfigurationError(CogPilotError, ValueError):
    pass


class ConvergenceError(CogPilotError, RuntimeError):
    """Multiplier search failed; ``bracket`` holds the last ``(lo, hi)`` pair."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
