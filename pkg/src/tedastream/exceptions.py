"""Exception hierarchy shared by every tedastream module."""

from __future__ import annotations


class TedaError(Exception):
    """Base class for all errors raised by tedastream."""


class InputError(TedaError, ValueError):
    """A sample contains non-finite or non-numeric values."""

    def __init__(self, message: str, index: int | None = None) -> None:
        if index is not None:
            message = f"sample {index}: {message}"
        super().__init__(message)
        self.index = index


class StreamShapeError(TedaError, ValueError):
    """A sample's dimension differs from the stream dimension."""

    def __init__(self, message: str, index: int | None = None) -> None:
        if index is not None:
            message = f"sample {index}: {message}"
        super().__init__(message)
        self.index = index


class StateError(TedaError, RuntimeError):
    """An operation was called on a detector state that cannot support it."""


class DegenerateVarianceError(TedaError, ArithmeticError):
    """Eccentricity was requested with a non-positive variance."""


class ConfigError(TedaError, ValueError):
    """Invalid detector, timing or generator configuration."""


class ParseError(TedaError, ValueError):
    """A CSV row could not be turned into a sample.

    ``row`` is the 1-based line number in the source file.
    """

    def __init__(self, message: str, row: int) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


class PipelineInvariantError(TedaError, AssertionError):
    """The pipeline simulator reached a state that must never happen."""
