"""Exception hierarchy shared by every module."""


class CatZeroError(Exception):
    """Base class for all library errors."""


class InvalidPointError(CatZeroError, ValueError):
    """A point does not belong to the space it is used with."""


class DomainError(CatZeroError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedOperationError(CatZeroError, TypeError):
    """The operation is not defined for this kind of space."""


class ValidationError(CatZeroError, ValueError):
    """Construction-time validation of a measure or mm-space failed."""


class SizeError(CatZeroError, ValueError):
    """An instance is too large for exact enumeration."""


class ConvergenceError(CatZeroError, RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate found so far is kept on ``best`` so callers can
    decide whether it is good enough.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
