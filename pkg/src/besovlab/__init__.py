"""Numerical checks of Besov-space estimates and non-uniform dependence for Euler flows."""

from .errors import (
    BesovLabError,
    BlowupError,
    ConfigError,
    DomainTruncationError,
    InvalidParameterError,
    PreconditionViolation,
    ReportIOError,
    ResolutionError,
    UsageError,
)
from .grid import BOX, TORUS, Grid, GridFunction, VelocityField

__version__ = "0.1.0"

__all__ = [
    "BOX",
    "TORUS",
    "BesovLabError",
    "BlowupError",
    "ConfigError",
    "DomainTruncationError",
    "Grid",
    "GridFunction",
    "InvalidParameterError",
    "PreconditionViolation",
    "ReportIOError",
    "ResolutionError",
    "UsageError",
    "VelocityField",
]
