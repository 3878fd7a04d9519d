"""Exception and warning types."""


class FracKirchhoffError(Exception):
    """Base class for library errors."""


class GridMismatchError(FracKirchhoffError, ValueError):
    """Two fields on different grids were combined."""


class ParameterError(FracKirchhoffError, ValueError):
    """Problem parameters violate an admissibility constraint."""


class RegimeError(ParameterError):
    """Operation requested outside the regime where it is defined."""


class BracketNotFound(FracKirchhoffError):
    """No sign change of the fiber derivative was found on the search range."""


class ConditionViolated(FracKirchhoffError):
    """The mixed-regime two-critical-point structure does not hold."""


class RootsNotFound(FracKirchhoffError):
    """The envelope h(t) has no positive interval (mu too large)."""


class NonConvergence(FracKirchhoffError):
    """An iterative solver stopped before meeting its tolerances.

    ``result`` carries the best iterate found so far.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DilationMassLossWarning(UserWarning):
    """A dilated field lost more than the allowed fraction of its mass."""
