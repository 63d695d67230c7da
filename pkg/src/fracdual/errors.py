"""Exception types raised by the numerical routines.

Validation problems derive from :class:`ValueError`; numerical failures derive
from :class:`NumericalError`.  The CLI maps the first family to exit code 2 and
the second to exit code 3.
"""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical method on valid input."""


class NonConvergenceError(NumericalError):
    """A series or iteration hit its term budget before meeting tolerance."""


class QuadratureError(NumericalError):
    """Adaptive quadrature could not reach the requested accuracy."""


class CFLViolation(NumericalError):
    """The explicit time step is too large for a nonnegative update."""


class DomainError(ValueError):
    """Arguments fall outside the domain where a formula applies."""


class GridMismatchError(ValueError):
    """Two grids that must be nested or aligned are not."""
