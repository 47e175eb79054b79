"""Exception types shared across the package."""


class CHFlowError(Exception):
    """Base class for all errors raised by this package."""


class GridMismatch(CHFlowError):
    """Operands live on different grids."""


class ChartViolation(CHFlowError):
    """A map left the chart of increasing C1 diffeomorphisms (min slope too small).

    During time integration this is the numerical wave-breaking signal: the
    flow map's derivative collapsed toward zero, so the state is about to
    leave the space the solver works in.  Carries the offending minimum slope
    and, when known, the simulation time at which it was detected.
    """

    def __init__(self, message: str, *, min_slope: float | None = None,
                 time: float | None = None):
        super().__init__(message)
        self.min_slope = min_slope
        self.time = time


class ConvergenceFailure(CHFlowError):
    """An iterative solve (monotone inversion) failed to reach tolerance."""


class TimeMismatch(CHFlowError):
    """A requested comparison time is not recorded in a trajectory."""


class ParseError(CHFlowError):
    """A configuration or data file is malformed."""


class ValidationError(CHFlowError):
    """A configuration violates invariants; message lists every violation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration: " + "; ".join(self.violations))


class AdmissibilityError(CHFlowError):
    """Initial data fails the admissibility conditions of the solution space."""
