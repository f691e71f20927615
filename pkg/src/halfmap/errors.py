"""Exception hierarchy.

Every message names the violated condition on the parameters, e.g.
``requires 4D-T^2>0``.
"""


class HalfMapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(HalfMapError, ValueError):
    pass


class NonexistentHalfMap(HalfMapError):
    pass


class DomainError(HalfMapError, ValueError):
    """W vanishes (or is negative) where it must be positive."""


class PvUndefined(HalfMapError, ValueError):
    pass


class OutOfDomain(HalfMapError, ValueError):
    pass


class NoConvergence(HalfMapError, RuntimeError):
    pass


class TangencyPoint(HalfMapError, ValueError):
    pass


class PreconditionViolated(HalfMapError, ValueError):
    pass


class WrongSide(HalfMapError, ValueError):
    pass


class NotInvertible(HalfMapError, ValueError):
    pass


class NoReturn(HalfMapError):
    """The flow did not come back to the section within the budget."""


class SearchBudgetExceeded(HalfMapError):
    """Grid search ended with unresolved behaviour; ``partial`` holds what was found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
