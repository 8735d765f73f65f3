"""Exceptions shared across modules; the CLI maps them to exit codes."""


class CapExceededError(RuntimeError):
    """A configured resource cap (ground size, arity, class, word length) was exceeded."""


class PrecisionError(ArithmeticError):
    """An interval computation straddles an integer at the working precision."""


class InconclusiveError(RuntimeError):
    """A decision could not be made uniformly on the truncation."""
