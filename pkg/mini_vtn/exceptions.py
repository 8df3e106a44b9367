"""Error hierarchy for Mini VTN.

Every error raised on purpose by the library derives from ``MiniVtnError`` and also from
the closest builtin, so callers may catch either.
"""


class MiniVtnError(Exception):
    """Base class for all library errors."""


class ShapeError(MiniVtnError, ValueError):
    """Operand extents do not agree."""


class ArgumentError(MiniVtnError, ValueError):
    """An argument is outside the domain of the operation."""


class ConfigurationError(MiniVtnError, ValueError):
    """A model, data or training configuration is inconsistent."""


class FormatError(MiniVtnError, ValueError):
    """A file does not follow the dataset or checkpoint layout."""


class TruncatedFileError(MiniVtnError, OSError):
    """A file ended before its header said it would."""

    def __init__(self, path: str, expected: int, got: int):
        self.path = path
        self.expected = expected
        self.got = got
        super().__init__(f"Truncated file {path}: expected {expected} more bytes, got {got}")


class DataValidationError(MiniVtnError, ValueError):
    """Input data violates a documented invariant (normalization, alignment, ...)."""
