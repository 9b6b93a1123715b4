"""Exception hierarchy shared across the package."""


class MipError(Exception):
    """Base class for all errors raised by mipsearch."""


class DomainError(MipError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class InputError(MipError, ValueError):
    """Malformed external input (CSV files, covariance matrices, flags)."""


class NumericalError(MipError, ArithmeticError):
    """A numerical routine could not produce a trustworthy value."""


class DivergenceError(NumericalError):
    """A simulated trajectory left the finite range."""
