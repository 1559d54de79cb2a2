"""Exception types shared across the package."""


class QDynError(Exception):
    """Base class for numerical failures raised by this package."""


class TruncationError(QDynError):
    """Probability mass leaked to the top level of a truncated Fock space."""


class DimensionMismatch(QDynError, ValueError):
    """Operator dimensions are incompatible with the requested operation."""


class NonFinite(QDynError, ValueError):
    """An input or result contains NaN or infinite entries."""


class TimeOutOfHorizon(QDynError, ValueError):
    """A time argument lies outside the interval on which a generator is defined."""


class StepControlFailure(QDynError):
    """The ODE integrator could not reach the requested tolerance."""
