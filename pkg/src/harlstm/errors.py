"""Exception hierarchy shared across the pipeline.

Everything derives from PipelineError so the CLI can map data problems to a
single exit code; numeric failures get their own branch.
"""


class PipelineError(Exception):
    """Base class for all recording/windowing/training/evaluation errors."""


# --- recording and annotation parsing ---------------------------------------

class MalformedRowError(PipelineError):
    """A recording CSV row has the wrong field count or a non-numeric value."""


class NonMonotonicTimestampError(PipelineError):
    """Timestamps in a recording are not strictly increasing."""


class EmptyRecordingError(PipelineError):
    """A recording file contains no data rows."""


class MalformedDescriptorError(PipelineError):
    """An annotation document is not valid JSON or violates the span schema."""


class InvertedSpanError(PipelineError):
    """A span's start is not before its stop, or trims leave no interval."""


class UnknownLabelError(PipelineError):
    """A span label falls outside the configured class set."""


class EmptySegmentError(PipelineError):
    """No samples survive a trim."""


class TooFewSamplesError(PipelineError):
    """Rate validation needs at least two samples."""


# --- windowing ---------------------------------------------------------------

class BadGeometryError(PipelineError):
    """Window size or step violate 0 < step <= size."""


class IndexOutOfRangeError(PipelineError):
    """A label index falls outside [0, class count)."""


class EmptyClassError(PipelineError):
    """A class has no segments (or none long enough to produce a window)."""


class DegenerateSplitError(PipelineError):
    """A train/test split would leave one side empty."""


# --- network numerics --------------------------------------------------------

class ShapeMismatchError(PipelineError):
    """Tensor shapes are inconsistent with the declared dimensions."""


class NonFiniteInputError(PipelineError):
    """An input batch contains NaN or infinity."""


class CacheMismatchError(PipelineError):
    """A forward cache does not correspond to the given parameters/batch."""


# --- training ----------------------------------------------------------------

class EmptySplitError(PipelineError):
    """Training requires non-empty train and test datasets."""


class DivergedLossError(PipelineError):
    """Training hit a non-finite loss; carries the last good state."""

    def __init__(self, message, params=None, history=None):
        super().__init__(message)
        self.params = params
        self.history = history


# --- serialization -----------------------------------------------------------

class VersionMismatchError(PipelineError):
    """A stored file declares an unsupported format version."""


class CorruptChecksumError(PipelineError):
    """A stored file fails its integrity check or cannot be decoded."""


# --- evaluation --------------------------------------------------------------

class LengthMismatchError(PipelineError):
    """True/predicted label lists differ in length."""


class LabelOutOfRangeError(PipelineError):
    """A label id falls outside the confusion matrix dimensions."""
