"""Exception types raised by the library."""


class SingularMatrixError(ArithmeticError):
    """A linear system is numerically singular."""


class NearSingularPivotError(SingularMatrixError):
    """Pivot-free banded elimination met a vanishing pivot.

    Callers should fall back to a pivoted dense solve.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ScenarioError(ValueError):
    """A scenario description is invalid or infeasible."""
