"""Exception hierarchy shared by all solvers."""


class GwqapError(Exception):
    """Base class for all library errors."""


class ValidationError(GwqapError):
    """Input failed a structural precondition."""


class NegativeWeight(ValidationError):
    pass


class SumNotOne(ValidationError):
    pass


class AllZero(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonSquare(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class NonPositiveExact(ValidationError):
    pass


class InvalidInit(ValidationError):
    pass


class NonEmptyRequired(ValidationError):
    pass


class UnknownFormat(ValidationError):
    pass


class NoConvergence(GwqapError):
    """Iteration cap hit before the tolerance was reached.

    Carries the best iterate so callers can still inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NumericalUnderflow(GwqapError):
    """Scaling kernel underflowed to zero; regularization is too small."""


class Infeasible(GwqapError):
    """No assignment satisfies the capacity/demand constraints."""


class GenerationFailed(GwqapError):
    """Instance generator exhausted its regeneration budget."""
