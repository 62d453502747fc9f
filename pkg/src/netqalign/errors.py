"""Exception taxonomy shared across the package.

Validation-type failures exit the CLI with status 1, numerical failures
with status 2; see :mod:`netqalign.cli`.
"""


class NetqalignError(Exception):
    """Base class for all package errors."""


class ValidationError(NetqalignError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """Malformed text input; the message carries the offending line number."""


class DegenerateInputError(ValidationError):
    """Structurally degenerate input, e.g. zero line sums or isolated nodes."""


class SizeError(ValidationError):
    """Explicit materialisation would exceed the configured size cap."""


class ConditioningError(ValidationError):
    """Conditioning on an event of (numerically) zero probability."""


class NumericalError(NetqalignError, ArithmeticError):
    """A computation failed to meet its accuracy contract."""


class BreakdownError(NumericalError):
    """An iteration produced the zero vector and cannot continue."""
