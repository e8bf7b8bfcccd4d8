"""Exception hierarchy shared by every module."""


class BesselSubordinateError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(BesselSubordinateError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(BesselSubordinateError, OverflowError):
    """The result is not representable in double precision."""


class NumericalError(BesselSubordinateError, ArithmeticError):
    """A numerical procedure did not reach its tolerance.

    ``estimate`` carries the achieved error estimate when one is available.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class PoleError(NumericalError):
    """A gamma factor was evaluated too close to one of its poles."""


class UnsupportedParameterError(BesselSubordinateError, ValueError):
    """The parameter combination is valid mathematically but not supported."""


class DataError(BesselSubordinateError, ValueError):
    """Input data is malformed (NaN, wrong shape, too short)."""
