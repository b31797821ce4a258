"""Exception hierarchy; the CLI maps each class to an exit code."""


class IntermapError(Exception):
    exit_code = 3


class ParameterError(IntermapError, ValueError):
    exit_code = 2


class DomainError(IntermapError, ValueError):
    exit_code = 3


class NumericalError(IntermapError, RuntimeError):
    exit_code = 3


class DepthError(NumericalError):
    """Partition depth beyond what double precision resolves, or beyond a table."""


class CapExceeded(NumericalError):
    def __init__(self, message, partial_orbit=None):
        super().__init__(message)
        self.partial_orbit = partial_orbit


class StarvationError(NumericalError):
    """Too few events for a stable estimate."""
