"""
Exception hierarchy shared by every dimfibre module
"""


class DimError(Exception):
    """Base class for all dimfibre errors"""


class InvalidParameterError(DimError, ValueError):
    """A parameter is outside its valid range or a precondition fails"""


class NumericalError(DimError, ArithmeticError):
    """A computation failed to converge or produced an invalid result"""


class DivergenceError(NumericalError):
    """The requested quantity is unbounded at these parameters"""


def require(condition, message):
    """Raise InvalidParameterError with `message` unless `condition` holds"""
    if not condition:
        raise InvalidParameterError(message)
