"""Exception types raised by the solvers and the CLI."""


class CovLassoError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(CovLassoError, ValueError):
    pass


class NonPositivePivot(CovLassoError, ValueError):
    """A recovery denominator was not strictly positive."""


class InvalidDiagonal(CovLassoError, ValueError):
    pass


class NonConvergence(CovLassoError, RuntimeError):
    """Iteration limit reached; the best iterate is kept in ``result``."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateData(CovLassoError, ValueError):
    pass


class BoundsDoNotBracket(CovLassoError, ValueError):
    pass


class ParseError(CovLassoError, ValueError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.line = line
        self.column = column


class NonNumericCell(ParseError):
    pass


class AsymmetricInput(CovLassoError, ValueError):
    pass
