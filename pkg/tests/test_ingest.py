import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harlstm.errors import (
    EmptyRecordingError,
    EmptySegmentError,
    InvertedSpanError,
    MalformedDescriptorError,
    MalformedRowError,
    NonMonotonicTimestampError,
    TooFewSamplesError,
    UnknownLabelError,
)
from harlstm.ingest import (
    AnnotationSpan,
    RawRecording,
    apply_trim,
    parse_annotations,
    parse_recording,
    validate_rate,
    write_annotations,
    write_recording,
)

CLASSES = ("eating", "smoking", "medication", "jogging")


def csv_of(rows):
    return "t_ms,x,y,z\n" + "\n".join(rows) + "\n"


def recording_at_40ms(n, start=0, device="dev1"):
    t = start + np.arange(n, dtype=np.int64) * 40
    return RawRecording(device_id=device, t_ms=t, values=np.zeros((n, 3)))


class TestParseRecording:
    def test_three_rows(self):
        rec = parse_recording(csv_of(["0,0.1,0.2,0.3", "40,1,2,3", "80,-1.5,0,9.81"]))
        assert len(rec) == 3
        assert rec.t_ms.tolist() == [0, 40, 80]
        assert rec.values[2].tolist() == [-1.5, 0.0, 9.81]

    def test_equal_timestamps_rejected(self):
        with pytest.raises(NonMonotonicTimestampError):
            parse_recording(csv_of(["100,0,0,0", "100,0,0,0"]))

    def test_decreasing_timestamps_rejected(self):
        with pytest.raises(NonMonotonicTimestampError):
            parse_recording(csv_of(["100,0,0,0", "60,0,0,0"]))

    def test_mean_rate_of_one_second_at_nominal_spacing(self):
        # 25 rows on the 40 ms grid span 960 ms: (25-1)*1000/960 = 25.0 exactly
        rows = [f"{ti * 40},0,0,0" for ti in range(25)]
        rec = parse_recording(csv_of(rows))
        report = validate_rate(rec, 25.0, 50)
        assert report.mean_rate_hz == pytest.approx(25.0, abs=0.1)

    def test_wrong_field_count(self):
        with pytest.raises(MalformedRowError):
            parse_recording(csv_of(["0,1,2"]))

    def test_non_numeric(self):
        with pytest.raises(MalformedRowError):
            parse_recording(csv_of(["0,a,2,3"]))

    def test_non_integer_timestamp(self):
        with pytest.raises(MalformedRowError):
            parse_recording(csv_of(["0.5,1,2,3"]))

    def test_negative_timestamp(self):
        with pytest.raises(MalformedRowError):
            parse_recording(csv_of(["-40,1,2,3"]))

    def test_missing_header(self):
        with pytest.raises(MalformedRowError):
            parse_recording("0,1,2,3\n")

    def test_empty(self):
        with pytest.raises(EmptyRecordingError):
            parse_recording("t_ms,x,y,z\n")

    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=1, max_value=100),
                st.decimals(
                    min_value=-100, max_value=100, places=6, allow_nan=False
                ),
                st.decimals(min_value=-100, max_value=100, places=6, allow_nan=False),
                st.decimals(min_value=-100, max_value=100, places=6, allow_nan=False),
            ),
            min_size=1,
            max_size=40,
        )
    )
    @settings(max_examples=60)
    def test_serializer_round_trip(self, rows):
        # strictly increasing timestamps from positive deltas
        t = 0
        lines = []
        for dt, x, y, z in rows:
            t += dt
            lines.append(f"{t},{x},{y},{z}")
        text = csv_of(lines)
        rec = parse_recording(text)
        again = parse_recording(write_recording(rec))
        assert np.array_equal(rec.t_ms, again.t_ms)
        assert np.array_equal(rec.values, again.values)


class TestParseAnnotations:
    def test_single_span(self):
        doc = json.dumps({"spans": [{"label": "eating", "start_ms": 1000, "stop_ms": 5000}]})
        spans = parse_annotations(doc, CLASSES)
        assert len(spans) == 1
        assert spans[0].label == "eating"
        assert spans[0].trim_head_ms == 0 and spans[0].trim_tail_ms == 0
        assert spans[0].confirmed is False

    def test_inverted_span(self):
        doc = json.dumps({"spans": [{"label": "eating", "start_ms": 5000, "stop_ms": 1000}]})
        with pytest.raises(InvertedSpanError):
            parse_annotations(doc, CLASSES)

    def test_unknown_label(self):
        doc = json.dumps({"spans": [{"label": "swimming", "start_ms": 0, "stop_ms": 1}]})
        with pytest.raises(UnknownLabelError):
            parse_annotations(doc, CLASSES)

    def test_labels_case_insensitive(self):
        doc = json.dumps({"spans": [{"label": "EATING", "start_ms": 0, "stop_ms": 1}]})
        assert parse_annotations(doc, CLASSES)[0].label == "eating"

    def test_bad_json(self):
        with pytest.raises(MalformedDescriptorError):
            parse_annotations("{not json", CLASSES)

    def test_missing_key(self):
        doc = json.dumps({"spans": [{"label": "eating", "start_ms": 0}]})
        with pytest.raises(MalformedDescriptorError):
            parse_annotations(doc, CLASSES)

    def test_negative_trim(self):
        doc = json.dumps(
            {"spans": [{"label": "eating", "start_ms": 0, "stop_ms": 100, "trim_head_ms": -1}]}
        )
        with pytest.raises(MalformedDescriptorError):
            parse_annotations(doc, CLASSES)

    def test_trims_consuming_span(self):
        doc = json.dumps(
            {
                "spans": [
                    {
                        "label": "eating",
                        "start_ms": 0,
                        "stop_ms": 1000,
                        "trim_head_ms": 600,
                        "trim_tail_ms": 600,
                    }
                ]
            }
        )
        with pytest.raises(InvertedSpanError):
            parse_annotations(doc, CLASSES)

    def test_round_trip(self):
        spans = [
            AnnotationSpan("eating", 1000, 5000, 120, 80, True, 0),
            AnnotationSpan("jogging", 9000, 20000, 0, 0, False, 1),
        ]
        again = parse_annotations(write_annotations(spans), CLASSES)
        assert again == [
            AnnotationSpan("eating", 1000, 5000, 120, 80, True, 0),
            AnnotationSpan("jogging", 9000, 20000, 0, 0, False, 1),
        ]


class TestApplyTrim:
    def test_identity_trim(self):
        rec = recording_at_40ms(200)  # t = 0..7960
        span = AnnotationSpan("eating", 1000, 5000)
        seg = apply_trim(rec, span)
        assert seg.t_ms[0] == 1000 and seg.t_ms[-1] == 5000
        assert seg.label == "eating"
        expected = [t for t in rec.t_ms if 1000 <= t <= 5000]
        assert seg.t_ms.tolist() == expected

    def test_head_tail_trims(self):
        rec = recording_at_40ms(200)
        span = AnnotationSpan("eating", 1000, 5000, trim_head_ms=500, trim_tail_ms=500)
        seg = apply_trim(rec, span)
        assert seg.t_ms[0] >= 1500 and seg.t_ms[-1] <= 4500
        assert seg.t_ms[0] == 1520 and seg.t_ms[-1] == 4480  # 40 ms grid

    def test_span_outside_recording(self):
        rec = recording_at_40ms(10)  # t = 0..360
        span = AnnotationSpan("eating", 5000, 9000)
        with pytest.raises(EmptySegmentError):
            apply_trim(rec, span)

    @given(
        n=st.integers(min_value=2, max_value=300),
        start=st.integers(min_value=0, max_value=12000),
        width=st.integers(min_value=1, max_value=12000),
        head=st.integers(min_value=0, max_value=3000),
        tail=st.integers(min_value=0, max_value=3000),
    )
    @settings(max_examples=80)
    def test_trim_is_contiguous_subrange(self, n, start, width, head, tail):
        rec = RawRecording(
            device_id="d",
            t_ms=np.arange(n, dtype=np.int64) * 40,
            values=np.arange(n * 3, dtype=np.float64).reshape(n, 3),
        )
        stop = start + width
        if start + head >= stop - tail:
            return
        span = AnnotationSpan("eating", start, stop, head, tail)
        try:
            seg = apply_trim(rec, span)
        except EmptySegmentError:
            return
        # contiguous: sample values identify original indices
        first = int(seg.values[0, 0]) // 3
        idx = np.arange(first, first + len(seg))
        assert np.array_equal(seg.t_ms, rec.t_ms[idx])
        assert np.array_equal(seg.values, rec.values[idx])
        # idempotent composition: zero-trim then trim == trim directly
        zero = apply_trim(rec, AnnotationSpan("eating", start, stop))
        via_zero = [t for t in zero.t_ms if span.trimmed_start_ms <= t <= span.trimmed_stop_ms]
        assert via_zero == seg.t_ms.tolist()


class TestValidateRate:
    def test_exact_40ms_spacing(self):
        rec = recording_at_40ms(100)
        report = validate_rate(rec, 25.0, 50)
        assert report.mean_rate_hz == 25.0
        assert report.max_gap_ms == 40
        assert report.gap_count_over_tol == 0

    def test_single_outlier_gap(self):
        t = np.concatenate([np.arange(50) * 40, 50 * 40 + 160 + np.arange(50) * 40])
        rec = RawRecording("d", t.astype(np.int64), np.zeros((100, 3)))
        report = validate_rate(rec, 25.0, 50)
        assert report.gap_count_over_tol == 1
        assert report.max_gap_ms == 200

    def test_101_samples_over_4000ms(self):
        rec = recording_at_40ms(101)
        assert rec.t_ms[-1] == 4000
        report = validate_rate(rec, 25.0, 50)
        assert report.mean_rate_hz == 25.0

    def test_too_few(self):
        with pytest.raises(TooFewSamplesError):
            validate_rate(recording_at_40ms(1), 25.0, 50)

    @given(
        gaps=st.lists(st.integers(min_value=1, max_value=500), min_size=2, max_size=60),
        lo=st.integers(min_value=0, max_value=40),
        width=st.integers(min_value=2, max_value=20),
    )
    @settings(max_examples=80)
    def test_segment_rate_never_beats_max_instantaneous(self, gaps, lo, width):
        t = np.concatenate([[0], np.cumsum(gaps)]).astype(np.int64)
        rec = RawRecording("d", t, np.zeros((len(t), 3)))
        hi = min(lo + width, len(t) - 1)
        if hi - lo < 1:
            return
        span = AnnotationSpan("eating", int(t[lo]), int(t[hi]) + 1)
        seg = apply_trim(rec, span)
        if len(seg) < 2:
            return
        max_instant = 1000.0 / min(np.diff(rec.t_ms))
        assert validate_rate(seg, 25.0, 50).mean_rate_hz <= max_instant + 1e-9
