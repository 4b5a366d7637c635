"""Exception types shared across the package."""


class IRSError(Exception):
    """Base class for all package errors."""


class DomainError(IRSError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(IRSError, ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class ConfigError(IRSError, ValueError):
    """An experiment configuration is missing fields or malformed."""
