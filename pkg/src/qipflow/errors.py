"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument failed a precondition check."""


class NumericalFailureError(RuntimeError):
    """An iterative routine did not reach its tolerance.

    ``estimate`` holds the best value available when the routine gave up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SingularMapError(ArithmeticError):
    """An intermediate map would divide by a (near) vanishing channel parameter."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
