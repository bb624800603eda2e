"""Exception types shared across the package."""


class TcqiteError(Exception):
    """Base class for package errors."""


class InputError(TcqiteError, ValueError):
    """Malformed input: bad files, inconsistent shapes, invalid configuration."""


class NumericalError(TcqiteError, ArithmeticError):
    """A numerical procedure could not produce a meaningful result."""
