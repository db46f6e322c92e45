"""Exception hierarchy shared by every backend."""


class SwapHomError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SwapHomError, ValueError):
    """An argument violates an operation's precondition."""


class DimensionMismatchError(ValidationError):
    """Two objects that must have equal dimension do not."""


class CapacityError(ValidationError):
    """A register or code is larger than the configured maximum."""
