"""Exception classes shared across the package.

The CLI maps these onto exit codes: DomainError -> 3, AccuracyError -> 4,
UsageError -> 2.
"""


class DomainError(ValueError):
    """A mathematical precondition is violated (bad argument, parity clash, ...)."""


class AccuracyError(RuntimeError):
    """A quadrature or truncation failed to reach its target tolerance."""


class UsageError(ValueError):
    """Bad CLI/config input."""
