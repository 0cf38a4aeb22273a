class QoctError(Exception):
    """Base class; the CLI maps every subclass to exit code 3."""


class PreconditionError(QoctError, ValueError):
    pass


class DimensionOverflowError(PreconditionError):
    pass


class BasisMismatchError(PreconditionError):
    pass


class NormalizationError(PreconditionError):
    pass


class NotPositiveSemidefiniteError(PreconditionError):
    pass


class SinglePathError(PreconditionError):
    """Raised when one path carries no population, so P_Q is undefined."""

    def __init__(self, message: str = "single-path state: P_Q undefined"):
        super().__init__(message)


class UnitSystemError(PreconditionError):
    pass


class CoverageError(PreconditionError):
    pass


class FormatError(ValueError):
    """Malformed input file; the CLI maps this to exit code 2."""
