"""Exception types raised across the package."""

import numpy as np


class SimccaError(Exception):
    """Base class for all package errors."""


class ParseError(SimccaError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class ValidationError(SimccaError, ValueError):
    pass


class DomainError(SimccaError, ValueError):
    pass


class EmptyResultError(SimccaError):
    pass


class WindowUnavailableError(SimccaError):
    pass


class ConditioningError(SimccaError, np.linalg.LinAlgError):
    pass


class InsufficientSamplesError(SimccaError, ValueError):
    pass


class EvaluationError(SimccaError, ValueError):
    pass


class DegenerateError(EvaluationError):
    pass


class NonConvergenceError(SimccaError):
    """An iterative solver ran out of iterations.

    The best point found is kept on ``best`` so callers can use it anyway.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
