"""Exception types shared across the simulator.

The CLI maps these onto exit codes, so every failure raised from library code
should be one of them.
"""


class AwpError(Exception):
    """Base class for all simulator errors."""


class ContractError(AwpError, ValueError):
    """An operation was called with arguments that break its preconditions
    (domain mismatch, grid mismatch, invalid parameter values)."""


class NumericalGuardError(AwpError):
    """Base for refusals triggered by a numerical guard."""


class ResolutionError(NumericalGuardError):
    """A feature is narrower than the grid can represent."""


class CostRefusalError(NumericalGuardError):
    """A direct quadrature would exceed its configured size budget."""


class DegenerateOrderError(NumericalGuardError):
    """Fractional order sits numerically on a multiple of pi."""


class NoRealOrderError(NumericalGuardError):
    """Geometry admits no real fractional order (|cos alpha| > 1)."""


class GeometryInconsistencyError(NumericalGuardError):
    """The two scale relations for (alpha, s) disagree beyond tolerance."""


class EnvelopeTooNarrowError(NumericalGuardError):
    """Pump envelope is not broad enough for the fractional-transform limit."""


class AliasingWarning(UserWarning):
    """A quadratic phase is undersampled at the grid edge."""
