"""Exception hierarchy shared by all crowdsafe modules."""


class CrowdSafeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CrowdSafeError, ValueError):
    """An input value lies outside the domain of the operation."""


class ShapeError(CrowdSafeError, ValueError):
    """Array dimensions are inconsistent."""


class ConfigurationError(CrowdSafeError, ValueError):
    """A parameter bundle or config file is incomplete or invalid."""


class SingularMatrixError(CrowdSafeError, ArithmeticError):
    """A transform cannot be inverted."""


class InputError(CrowdSafeError, ValueError):
    """Not enough data to run the requested operation."""


class ParseError(CrowdSafeError, ValueError):
    """A record in an input file does not match its schema."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
