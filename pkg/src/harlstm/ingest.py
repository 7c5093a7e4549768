"""Parsing and trimming of raw wrist accelerometer recordings.

A recording arrives as a CSV of timestamped tri-axial samples (nominal 25 Hz),
an annotation document describes reported activity spans plus supervisor trim
adjustments. Output is labeled contiguous segments ready for windowing.

All functions here are pure; recordings and segments are backed by numpy
arrays and never mutated after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyRecordingError,
    EmptySegmentError,
    InvertedSpanError,
    MalformedDescriptorError,
    MalformedRowError,
    NonMonotonicTimestampError,
    TooFewSamplesError,
    UnknownLabelError,
)

RECORDING_HEADER = "t_ms,x,y,z"

DEFAULT_CLASS_SET = ("eating", "smoking", "medication", "jogging", "other")


@dataclass(frozen=True)
class Sample:
    """One accelerometer reading: epoch milliseconds plus x/y/z in m/s^2."""

    t: int
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class RawRecording:
    """An ordered, strictly increasing stream of samples from one device."""

    device_id: str
    t_ms: np.ndarray          # int64 [n]
    values: np.ndarray        # float64 [n, 3], columns x, y, z
    nominal_rate_hz: float = 25.0

    def __post_init__(self):
        if len(self.t_ms) == 0:
            raise EmptyRecordingError(f"recording {self.device_id!r} has no samples")
        if len(self.t_ms) != len(self.values):
            raise MalformedRowError("timestamp and value arrays differ in length")
        if np.any(np.diff(self.t_ms) <= 0):
            raise NonMonotonicTimestampError(
                f"timestamps of {self.device_id!r} are not strictly increasing"
            )

    def __len__(self) -> int:
        return len(self.t_ms)

    @property
    def samples(self) -> list[Sample]:
        return [
            Sample(int(t), float(v[0]), float(v[1]), float(v[2]))
            for t, v in zip(self.t_ms, self.values)
        ]


@dataclass(frozen=True)
class AnnotationSpan:
    """One reported activity occurrence with supervisor trim adjustments."""

    label: str
    reported_start_ms: int
    reported_stop_ms: int
    trim_head_ms: int = 0
    trim_tail_ms: int = 0
    confirmed: bool = False
    span_id: int = 0

    def __post_init__(self):
        if self.reported_start_ms >= self.reported_stop_ms:
            raise InvertedSpanError(
                f"span {self.span_id}: start {self.reported_start_ms} >= stop "
                f"{self.reported_stop_ms}"
            )
        if self.trim_head_ms < 0 or self.trim_tail_ms < 0:
            raise MalformedDescriptorError(f"span {self.span_id}: negative trim")
        if self.trimmed_start_ms >= self.trimmed_stop_ms:
            raise InvertedSpanError(
                f"span {self.span_id}: trims leave an empty interval "
                f"[{self.trimmed_start_ms}, {self.trimmed_stop_ms}]"
            )

    @property
    def trimmed_start_ms(self) -> int:
        return self.reported_start_ms + self.trim_head_ms

    @property
    def trimmed_stop_ms(self) -> int:
        return self.reported_stop_ms - self.trim_tail_ms


@dataclass(frozen=True)
class LabeledSegment:
    """Contiguous samples carrying a single activity label."""

    label: str
    t_ms: np.ndarray          # int64 [n]
    values: np.ndarray        # float64 [n, 3]
    source: str = ""

    def __post_init__(self):
        if len(self.t_ms) == 0:
            raise EmptySegmentError(f"segment {self.source!r} is empty")
        if np.any(np.diff(self.t_ms) <= 0):
            raise NonMonotonicTimestampError(
                f"segment {self.source!r} timestamps are not strictly increasing"
            )

    def __len__(self) -> int:
        return len(self.t_ms)


@dataclass(frozen=True)
class RateReport:
    mean_rate_hz: float
    max_gap_ms: int
    gap_count_over_tol: int


def parse_recording(
    text: str, device_id: str = "unknown", nominal_rate_hz: float = 25.0
) -> RawRecording:
    """Parse recording CSV (header ``t_ms,x,y,z``) into a RawRecording.

    Raises MalformedRowError on bad field counts or non-numeric/non-finite
    values, NonMonotonicTimestampError if timestamps do not strictly increase,
    and EmptyRecordingError when there are no data rows.
    """
    lines = text.split("\n")
    if not lines or lines[0].strip("\r ") != RECORDING_HEADER:
        raise MalformedRowError(
            f"line 1: expected header {RECORDING_HEADER!r}"
        )
    ts: list[int] = []
    vals: list[tuple[float, float, float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip("\r")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise MalformedRowError(
                f"line {lineno}: expected 4 fields, got {len(fields)}"
            )
        try:
            t = int(fields[0])
            x, y, z = (float(f) for f in fields[1:])
        except ValueError as exc:
            raise MalformedRowError(f"line {lineno}: {exc}") from exc
        if t < 0:
            raise MalformedRowError(f"line {lineno}: negative timestamp {t}")
        if not all(math.isfinite(v) for v in (x, y, z)):
            raise MalformedRowError(f"line {lineno}: non-finite acceleration")
        ts.append(t)
        vals.append((x, y, z))
    if not ts:
        raise EmptyRecordingError("no data rows")
    return RawRecording(
        device_id=device_id,
        t_ms=np.asarray(ts, dtype=np.int64),
        values=np.asarray(vals, dtype=np.float64),
        nominal_rate_hz=nominal_rate_hz,
    )


def _format_value(v: float) -> str:
    # up to 6 fractional digits, no trailing zeros
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-0") else "0"


def write_recording(rec: RawRecording) -> str:
    """Serialize back to the recording CSV format (LF endings)."""
    lines = [RECORDING_HEADER]
    for t, v in zip(rec.t_ms, rec.values):
        lines.append(
            f"{int(t)},{_format_value(v[0])},{_format_value(v[1])},{_format_value(v[2])}"
        )
    return "\n".join(lines) + "\n"


_SPAN_KEYS = ("label", "start_ms", "stop_ms")


def parse_annotations(
    text: str, class_set: tuple[str, ...] | list[str] = DEFAULT_CLASS_SET
) -> list[AnnotationSpan]:
    """Parse an annotation document into spans, validating every one.

    The document is JSON: ``{"spans": [{label, start_ms, stop_ms,
    trim_head_ms, trim_tail_ms, confirmed}, ...]}``; trims default to 0 and
    ``confirmed`` to false. Any invalid span rejects the whole file. Labels
    are case-insensitive and must belong to ``class_set``.
    """
    classes = {c.lower() for c in class_set}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDescriptorError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("spans"), list):
        raise MalformedDescriptorError('document must be an object with a "spans" list')
    spans = []
    for idx, raw in enumerate(doc["spans"]):
        if not isinstance(raw, dict):
            raise MalformedDescriptorError(f"span {idx}: not an object")
        for key in _SPAN_KEYS:
            if key not in raw:
                raise MalformedDescriptorError(f"span {idx}: missing key {key!r}")
        label = raw["label"]
        if not isinstance(label, str):
            raise MalformedDescriptorError(f"span {idx}: label must be a string")
        label = label.lower()
        if label not in classes:
            raise UnknownLabelError(
                f"span {idx}: label {label!r} not in class set {sorted(classes)}"
            )
        ints = {}
        for key, default in (
            ("start_ms", None),
            ("stop_ms", None),
            ("trim_head_ms", 0),
            ("trim_tail_ms", 0),
        ):
            value = raw.get(key, default)
            if not isinstance(value, int) or isinstance(value, bool):
                raise MalformedDescriptorError(f"span {idx}: {key} must be an integer")
            ints[key] = value
        confirmed = raw.get("confirmed", False)
        if not isinstance(confirmed, bool):
            raise MalformedDescriptorError(f"span {idx}: confirmed must be a boolean")
        spans.append(
            AnnotationSpan(
                label=label,
                reported_start_ms=ints["start_ms"],
                reported_stop_ms=ints["stop_ms"],
                trim_head_ms=ints["trim_head_ms"],
                trim_tail_ms=ints["trim_tail_ms"],
                confirmed=confirmed,
                span_id=idx,
            )
        )
    return spans


def write_annotations(spans: list[AnnotationSpan]) -> str:
    """Serialize spans to the annotation document format."""
    doc = {
        "spans": [
            {
                "label": s.label,
                "start_ms": s.reported_start_ms,
                "stop_ms": s.reported_stop_ms,
                "trim_head_ms": s.trim_head_ms,
                "trim_tail_ms": s.trim_tail_ms,
                "confirmed": s.confirmed,
            }
            for s in spans
        ]
    }
    return json.dumps(doc, indent=2) + "\n"


def apply_trim(rec: RawRecording, span: AnnotationSpan) -> LabeledSegment:
    """Cut the trimmed span out of a recording, boundaries inclusive.

    Keeps samples with trimmed_start <= t <= trimmed_stop; raises
    EmptySegmentError when nothing survives.
    """
    lo = np.searchsorted(rec.t_ms, span.trimmed_start_ms, side="left")
    hi = np.searchsorted(rec.t_ms, span.trimmed_stop_ms, side="right")
    if hi <= lo:
        raise EmptySegmentError(
            f"span {span.span_id} [{span.trimmed_start_ms}, {span.trimmed_stop_ms}] "
            f"contains no samples of {rec.device_id!r}"
        )
    return LabeledSegment(
        label=span.label,
        t_ms=rec.t_ms[lo:hi].copy(),
        values=rec.values[lo:hi].copy(),
        source=f"{rec.device_id}:{span.span_id}",
    )


def validate_rate(
    rec: RawRecording | LabeledSegment, expected_hz: float = 25.0, gap_tol_ms: int = 50
) -> RateReport:
    """Report the mean sampling rate and inter-sample gaps over tolerance.

    ``expected_hz`` is advisory context for the caller; the report itself is
    purely observational.
    """
    if len(rec.t_ms) < 2:
        raise TooFewSamplesError("rate validation needs at least 2 samples")
    gaps = np.diff(rec.t_ms)
    span_ms = int(rec.t_ms[-1] - rec.t_ms[0])
    return RateReport(
        mean_rate_hz=(len(rec.t_ms) - 1) * 1000.0 / span_ms,
        max_gap_ms=int(gaps.max()),
        gap_count_over_tol=int(np.count_nonzero(gaps > gap_tol_ms)),
    )
