"""Exception hierarchy shared by every EcNet module.

The CLI maps each family to a stable exit code:
usage errors exit 1, data errors exit 2, numeric failures exit 3.
"""


class EcNetError(Exception):
    """Base class for all detector errors."""

    exit_code: int = 2


# Data errors

class ZeekParseError(EcNetError):
    """Unrecoverable problem in a Zeek log (bad or missing header)."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class SamplingError(EcNetError):
    """Sampling or splitting request that cannot be satisfied."""


class LabelVocabError(EcNetError):
    """Label vocabulary is missing a required class or a label is unknown."""


class SchemaError(EcNetError):
    """Feature schema cannot be fitted or does not match the data."""


class IncompatibleDataError(EcNetError):
    """Checkpoint and evaluation data disagree on schema or labels."""


class CheckpointError(EcNetError):
    """Base class for checkpoint IO failures."""


class CheckpointFormatError(CheckpointError):
    """File is not an EcNet checkpoint or its header is unreadable."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint was written by a newer format version."""


class CheckpointChecksumError(CheckpointError):
    """Payload checksum mismatch or truncated file."""


# Numeric failures

class ShapeError(EcNetError, ValueError):
    """Array dimensions do not agree."""

    exit_code = 3


class NumericError(EcNetError):
    """A value that must be finite is not."""

    exit_code = 3


class TrainingDivergedError(NumericError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}")


class CacheConsumedError(EcNetError):
    """A forward cache was passed to backward more than once."""

    exit_code = 3


# Usage errors

class ModelConfigError(EcNetError):
    """Model configuration is inconsistent with the schema or vocabulary."""

    exit_code = 1

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid model configuration: " + "; ".join(violations))
