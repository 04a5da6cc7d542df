"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class FormatError(ValueError):
    """An input file or document is malformed."""


class RangeError(ValueError):
    """A requested window or index falls outside the available data."""


class StateError(RuntimeError):
    """An operation was called in the wrong lifecycle state."""


class NumericError(ArithmeticError):
    """A numerical procedure failed (non-finite values, singular matrices)."""
