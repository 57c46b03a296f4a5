"""Exception hierarchy shared by every besovlab module."""


class BesovLabError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(BesovLabError, ValueError):
    pass


class ResolutionError(BesovLabError):
    """Grid too coarse for the requested frequency content."""

    def __init__(self, message, required_n=None):
        super().__init__(message)
        self.required_n = required_n


class DomainTruncationError(BesovLabError):
    """Box too small for a field that should emulate whole-space data."""


class PreconditionViolation(BesovLabError, ValueError):
    """Inequality requested outside the range where it is claimed."""


class ConfigError(BesovLabError, ValueError):
    pass


class UsageError(BesovLabError, ValueError):
    pass


class BlowupError(BesovLabError, FloatingPointError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ReportIOError(BesovLabError, OSError):
    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
