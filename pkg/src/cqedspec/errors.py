"""Exception types shared across the package."""

from __future__ import annotations


class TruncationError(ValueError):
    """A requested state or operator does not fit in the truncated Fock space."""


class GridMismatchError(ValueError):
    """A frequency does not fall on an exact bin of the discrete spectrum."""


class FitError(RuntimeError):
    """A spectral fit could not be performed on the given data."""


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
