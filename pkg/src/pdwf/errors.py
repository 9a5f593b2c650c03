"""Exception hierarchy shared across the package.

``ValidationError`` and ``DomainError`` signal bad caller input (CLI exit 1),
``ResourceError`` and ``NumericalError`` signal internal limits (CLI exit 2).
"""


class PdwfError(Exception):
    pass


class ValidationError(PdwfError, ValueError):
    """Structurally invalid input (overlapping blocks, mismatched sizes, ...)."""


class DomainError(PdwfError, ValueError):
    """Parameter outside the mathematical domain (theta <= 0, i > j, ...)."""


class ResourceError(PdwfError, RuntimeError):
    """Request exceeds a configured cap (enumeration size, cache row, ...)."""


class NumericalError(PdwfError, RuntimeError):
    """A numeric guard tripped (non-terminating stick-breaking, ...)."""
