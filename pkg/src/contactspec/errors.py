"""Exception types shared by every module of the package."""


class InvalidArgument(ValueError):
    """An input violates a documented precondition."""


class SingularEvaluation(ArithmeticError):
    """A kernel was evaluated on (or numerically at) its singular set."""


class NoSignChange(ValueError):
    """A root bracket does not enclose a sign change."""


class AccuracyFailure(RuntimeError):
    """A numerical procedure did not reach the requested accuracy.

    The last estimate and its error bound are kept so callers can decide
    whether the result is still usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SearchFailure(RuntimeError):
    """A bracketing search found no sign change in its window.

    ``sign`` is the common sign of the scanned function over the window
    (``-1`` or ``+1``) when known, ``lo``/``hi`` the window.
    """

    def __init__(self, message, lo=None, hi=None, sign=None):
        super().__init__(message)
        self.lo = lo
        self.hi = hi
        self.sign = sign


class CalibrationFailure(RuntimeError):
    """The calibration ratios disagree; the kernel is inconsistent."""

    def __init__(self, message, ratios=None):
        super().__init__(message)
        self.ratios = ratios


class ResolutionFailure(RuntimeError):
    """A discretization is too coarse to resolve what was asked for."""


class PrecisionWarning(UserWarning):
    """A Monte-Carlo estimate has a large relative standard error."""
