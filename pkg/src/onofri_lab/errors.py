"""Exception hierarchy shared by every module.

``DomainError`` covers inputs outside an operation's precondition and maps to
CLI exit status 1.  ``NumericalError`` and its subclasses cover failures of a
numerical method on valid input and map to exit status 2.
"""


class OnofriLabError(Exception):
    pass


class DomainError(OnofriLabError, ValueError):
    pass


class UnsupportedError(DomainError):
    """Configuration that has no closed-form treatment here."""


class NumericalError(OnofriLabError, RuntimeError):
    pass


class ConvergenceError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    """Two independent routes to the same quantity disagree."""


class BlowUpError(NumericalError):
    """Integration stopped before reaching the requested radius."""

    def __init__(self, message: str, radius_reached: float):
        super().__init__(message)
        self.radius_reached = radius_reached


class InsufficientDataError(NumericalError):
    pass
