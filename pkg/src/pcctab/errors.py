"""Exception hierarchy shared across the package."""


class PcctabError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PcctabError, ValueError):
    """Invalid user input: bad coordinates, malformed files, bad options."""


class FeasibilityError(PcctabError, RuntimeError):
    """An exhaustive enumeration would exceed the configured size cap."""

    def __init__(self, message: str, size: int):
        super().__init__(message)
        self.size = size


class DegeneracyError(PcctabError, ArithmeticError):
    """A ratio or statistic is undefined for the given data (e.g. a positive
    observed count over a zero expected count)."""
