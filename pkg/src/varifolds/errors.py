"""Exception hierarchy shared by every module.

Two failure classes matter to callers (and to the CLI exit codes): bad
inputs caught before any computation starts, and conditions discovered
numerically (rank-deficient frames, empty cells, isolated points).
"""


class VarifoldError(Exception):
    """Base class for all package errors."""


class ValidationError(VarifoldError, ValueError):
    """Invalid argument or configuration; nothing was computed."""


class NumericError(VarifoldError, ArithmeticError):
    """A computation could not produce a meaningful result."""
