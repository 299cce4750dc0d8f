"""Exception hierarchy shared by every module."""


class PredictabilityError(Exception):
    """Base class for all library errors."""


class InvalidArgument(PredictabilityError, ValueError):
    """An argument violates an operation's precondition."""


class InsufficientData(PredictabilityError, ValueError):
    """The series is too short for the requested computation."""


class UndefinedScale(PredictabilityError, ArithmeticError):
    """MASE scale is zero because the training signal has no first differences."""


class FitDegenerate(PredictabilityError, ValueError):
    """The (mase, wpe) point set cannot determine a curve fit."""


class TraceFormatError(PredictabilityError, ValueError):
    """A trace file could not be parsed.

    ``line`` is the 1-based line number of the offending row, when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class PredictabilityWarning(UserWarning):
    """A computation fell back to a default or did not converge."""
