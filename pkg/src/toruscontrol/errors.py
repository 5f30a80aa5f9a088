"""Exception types raised across the package."""

from __future__ import annotations


class InvalidInputError(ValueError):
    """Malformed numeric input (non-finite values, wrong shapes)."""


class ConfigurationError(ValueError):
    """Inconsistent configuration: dimensions, margins, axis restrictions.

    ``field`` optionally carries a dotted path into a config document.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DivergenceError(ArithmeticError):
    """A numerical integration produced non-finite values."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
