"""Exception types shared across the toolkit."""


class RehabKitError(Exception):
    """Base class for all toolkit errors."""


class RecordingParseError(RehabKitError):
    """Raised when a recording file cannot be parsed; names the offending line/field."""


class SchemaError(RehabKitError):
    """Raised when data violates the fixed skeleton layout (e.g. wrong joint count)."""


class DataError(RehabKitError):
    """Raised on non-finite or otherwise unusable numeric values."""


class EmptyInputError(RehabKitError):
    """Raised when an operation receives no data to work on."""


class ParameterError(RehabKitError):
    """Raised on invalid configuration parameters (e.g. even context window)."""


class ShapeError(RehabKitError):
    """Raised on tensor shape mismatches; the message names both shapes."""


class NumericsError(RehabKitError):
    """Raised when a forward op produces NaN or Inf."""


class TapeError(RehabKitError):
    """Raised on invalid use of the backward tape (e.g. backward twice)."""


class StateError(RehabKitError):
    """Raised when an object is used after close or before required setup."""


class InsufficientDataError(RehabKitError):
    """Raised when a training routine receives too few sequences."""


class TrainingError(RehabKitError):
    """Raised when training diverges; carries the offending epoch index."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch
