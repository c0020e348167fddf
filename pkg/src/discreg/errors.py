"""Exception hierarchy shared by every module."""


class DiscregError(Exception):
    """Base class for errors raised by this package."""


class InvalidModelError(DiscregError, ValueError):
    """An MDP or transition tensor violates its invariants."""


class ParameterError(DiscregError, ValueError):
    """A regularization or environment parameter is out of range."""


class NumericalError(DiscregError, ArithmeticError):
    """A linear solve or other numerical step failed."""


class ConfigError(DiscregError, ValueError):
    """An experiment config or input file could not be parsed."""
