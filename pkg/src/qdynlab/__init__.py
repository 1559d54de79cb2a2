"""Numerical laboratory for open quantum dynamics on lattices and in a pumped cavity."""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatch,
    NonFinite,
    QDynError,
    StepControlFailure,
    TimeOutOfHorizon,
    TruncationError,
)
