"""Exception types raised by the simulator."""


class ZenoCloneError(Exception):
    """Base class for all simulator errors."""


class ParameterError(ZenoCloneError, ValueError):
    """Invalid physical parameter."""


class ConfigError(ZenoCloneError):
    """Bad configuration document or sweep path."""

    def __init__(self, message: str, key: str = ""):
        """
        Initialize config error.

        Args:
            message: Human readable description
            key: Offending configuration key or parameter path
        """
        super().__init__(message)
        self.key = key


class NumericalError(ZenoCloneError):
    """Norm, trace, positivity or stability breach during a computation."""


class OutputError(ZenoCloneError):
    """Failure while writing result files."""
