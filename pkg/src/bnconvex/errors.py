"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Inputs have inconsistent or empty shapes."""


class DegenerateDataError(ValueError):
    """Data is numerically zero after centering; no whitened basis exists."""


class DegenerateDirectionError(ValueError):
    """A hidden unit's centered pre-activation has zero norm."""


class CapacityError(ValueError):
    """Problem size exceeds a guard meant to prevent combinatorial blow-up."""


class InfeasibleSolutionError(ValueError):
    """A solution violates its cone constraints beyond the stated tolerance."""


class NumericalError(RuntimeError):
    """An iterative routine failed to converge or produced non-finite values."""


class DivergenceError(NumericalError):
    """Training or solving produced NaN/Inf.

    Carries ``last_state`` with the last finite iterate when available.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
