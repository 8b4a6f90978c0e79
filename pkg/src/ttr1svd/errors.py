"""Exception types shared by the package."""


class TTr1Error(Exception):
    """Base class for all errors raised by ttr1svd."""


class ArgumentError(TTr1Error, ValueError):
    """Invalid input: wrong shape, out-of-range index, malformed file."""


class NumericalError(TTr1Error, ArithmeticError):
    """A numerical kernel failed (e.g. SVD did not converge)."""
