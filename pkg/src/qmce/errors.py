"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid input and unsolvable requests
exit 1, non-convergence exits 2, verification failures exit 3.
"""

from __future__ import annotations


class QmceError(Exception):
    """Base class for package errors."""


class InvalidInputError(QmceError, ValueError):
    """Arguments violate a documented precondition."""


class SpectrumParseError(InvalidInputError):
    """A spectrum file line could not be parsed."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ResourceLimitError(QmceError, ValueError):
    """Request exceeds a hard resource guard."""


class NoSolutionError(QmceError, ValueError):
    """The requested value lies outside the attainable range."""


class ConvergenceError(QmceError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""
