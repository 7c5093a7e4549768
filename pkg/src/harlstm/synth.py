"""Synthetic wrist-accelerometer corpora for tests and demos.

Four activity motifs at 25 Hz with per-instance jitter: repetitive bite-like
arcs (hand to mouth, brief hold), puff-like arcs (same gesture family but a
long hold at the mouth), high-frequency step-like oscillation, and a
one-shot pill-taking composite (shake, raise, long drink tilt, lower). The
classes are separable but the bite/puff pair shares its gesture shape on
purpose.

All values are m/s^2 with a gravity baseline; timestamps are exact 40 ms
grid. Everything is driven by an explicit seed.
"""

from __future__ import annotations

import numpy as np

from .ingest import AnnotationSpan, LabeledSegment, RawRecording
from .windows import ClassMap, WindowedDataset

RATE_HZ = 25
STEP_MS = 1000 // RATE_HZ

SYNTH_CLASSES = ("eating", "smoking", "medication", "jogging")


def _bump(n: int, amp: float) -> np.ndarray:
    """Smooth half-sine pulse, the acceleration signature of an arm move."""
    return amp * np.sin(np.linspace(0.0, np.pi, n, endpoint=True))


def _raise_lower(xyz: np.ndarray, start: int, n_move: int, amp: float) -> None:
    """Write a hand-raise (or mirrored lower for negative amp) in place."""
    end = min(start + n_move, len(xyz))
    n = end - start
    if n <= 0:
        return
    xyz[start:end, 0] += _bump(n, amp)
    xyz[start:end, 2] += _bump(n, -0.55 * amp)
    xyz[start:end, 1] += _bump(n, 0.3 * amp)


def _hand_to_mouth_cycles(
    n: int,
    rng: np.random.Generator,
    hold_s: float,
    period_s: float,
    amp_lo: float,
    amp_hi: float,
    posture: tuple[float, float, float],
    tremor_hz: float,
) -> np.ndarray:
    """Shared generator for bite-like and puff-like repetitions."""
    xyz = np.zeros((n, 3))
    amp = rng.uniform(amp_lo, amp_hi)
    period = int(period_s * rng.uniform(0.85, 1.15) * RATE_HZ)
    move = int(rng.uniform(0.8, 1.2) * RATE_HZ)
    hold = int(hold_s * rng.uniform(0.8, 1.2) * RATE_HZ)
    pos = int(rng.integers(0, max(period // 2, 1)))
    while pos < n:
        _raise_lower(xyz, pos, move, amp)
        mouth = pos + move
        stop = min(mouth + hold, n)
        if stop > mouth:
            # tremor plus a sustained posture shift while the hand is up
            tt = np.arange(stop - mouth) / RATE_HZ
            xyz[mouth:stop, 1] += 0.35 * np.sin(
                2 * np.pi * tremor_hz * tt + rng.uniform(0, 6.28)
            )
            xyz[mouth:stop] += np.asarray(posture)
        _raise_lower(xyz, stop, move, -amp)
        pos += period
    return xyz


def _bite_motif(n: int, rng: np.random.Generator) -> np.ndarray:
    return _hand_to_mouth_cycles(
        n, rng, hold_s=0.55, period_s=3.8,
        amp_lo=3.2, amp_hi=4.4, posture=(1.1, 0.0, -0.5), tremor_hz=3.0,
    )


def _puff_motif(n: int, rng: np.random.Generator) -> np.ndarray:
    # same gesture family as a bite, but slower, softer, and with a long
    # held-at-mouth plateau in a visibly different wrist posture
    return _hand_to_mouth_cycles(
        n, rng, hold_s=4.5, period_s=11.0,
        amp_lo=1.8, amp_hi=2.6, posture=(2.4, 0.6, -1.4), tremor_hz=1.2,
    )


def _step_motif(n: int, rng: np.random.Generator) -> np.ndarray:
    xyz = np.zeros((n, 3))
    f = rng.uniform(2.5, 3.2)
    t = np.arange(n) / RATE_HZ
    phase = rng.uniform(0, 6.28)
    amp = rng.uniform(6.0, 9.0)
    vertical = np.sin(2 * np.pi * f * t + phase)
    xyz[:, 2] += amp * vertical + 0.5 * amp * np.abs(vertical) ** 3  # heel strikes
    xyz[:, 0] += 0.45 * amp * np.sin(2 * np.pi * f * t + phase + 1.6)
    xyz[:, 1] += 0.25 * amp * np.sin(2 * np.pi * 0.5 * f * t + phase)
    return xyz


def _pill_motif(n: int, rng: np.random.Generator) -> np.ndarray:
    """One-shot sequence: bottle shake, pause, raise, drink tilt, lower."""
    xyz = np.zeros((n, 3))
    t0 = int(rng.integers(0, max(n // 6, 1)))
    shake_n = int(2.0 * RATE_HZ * rng.uniform(0.8, 1.2))
    tt = np.arange(shake_n) / RATE_HZ
    stop = min(t0 + shake_n, n)
    xyz[t0:stop, 0] += 2.2 * np.sin(2 * np.pi * 7.5 * tt[: stop - t0])
    xyz[t0:stop, 1] += 1.8 * np.sin(2 * np.pi * 7.5 * tt[: stop - t0] + 0.9)
    pos = stop + int(rng.uniform(0.5, 1.5) * RATE_HZ)
    move = int(rng.uniform(0.9, 1.3) * RATE_HZ)
    amp = rng.uniform(2.5, 3.8)
    _raise_lower(xyz, pos, move, amp)
    drink0 = pos + move
    drink_n = int(rng.uniform(4.0, 6.0) * RATE_HZ)
    stop = min(drink0 + drink_n, n)
    if stop > drink0:
        ramp = np.linspace(0.0, 1.0, stop - drink0)
        tilt = np.sin(ramp * np.pi)  # tip the wrist back and return
        xyz[drink0:stop, 2] += 4.0 * tilt
        xyz[drink0:stop, 0] += -2.2 * tilt
    _raise_lower(xyz, stop, move, -amp)
    return xyz


_MOTIFS = {
    "eating": _bite_motif,
    "smoking": _puff_motif,
    "jogging": _step_motif,
    "medication": _pill_motif,
}


def motif_values(label: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """[n x 3] acceleration for one activity instance, gravity included."""
    gravity = np.array([0.4, -1.8, 9.6]) + rng.normal(0.0, 0.35, size=3)
    xyz = _MOTIFS[label](n, rng) + gravity
    xyz += rng.normal(0.0, 0.12, size=xyz.shape)
    return xyz


def make_segment(
    label: str, duration_s: float, rng: np.random.Generator,
    source: str = "", start_ms: int = 0,
) -> LabeledSegment:
    n = int(duration_s * RATE_HZ)
    return LabeledSegment(
        label=label,
        t_ms=start_ms + np.arange(n, dtype=np.int64) * STEP_MS,
        values=motif_values(label, n, rng),
        source=source or f"synth-{label}",
    )


def make_corpus(seed: int, scale: float = 1.0) -> list[LabeledSegment]:
    """Deliberately class-skewed segment corpus for the full pipeline.

    At scale 1.0 the majority class (eating) projects roughly 630 windows at
    window 150 / step 10 and the others 240 to 330 each, so balancing has
    real work to do and the balanced corpus exceeds 2000 windows.
    """
    rng = np.random.default_rng(seed)
    plan = {
        "eating": [90.0, 90.0, 85.0],
        "smoking": [60.0, 55.0],
        "medication": [32.0, 30.0, 28.0, 30.0],
        "jogging": [70.0, 65.0],
    }
    segments = []
    for label, durations in plan.items():
        for k, dur in enumerate(durations):
            segments.append(
                make_segment(
                    label,
                    dur * scale * rng.uniform(0.9, 1.1),
                    rng,
                    source=f"synth-{label}-{k}",
                )
            )
    return segments


def make_recording(
    seed: int,
    bites: int = 6,
    duration_s: float = 147.0,
    device_id: str = "watch-demo",
    whole_session: bool = False,
) -> tuple[RawRecording, list[AnnotationSpan]]:
    """A pizza-meal style recording: repeated bites inside one long take.

    Returns the recording plus approximate (deliberately sloppy, unconfirmed)
    annotation spans, the shape a participant would report: one span per bite
    by default, or a single span over the whole eating session when
    ``whole_session`` is set (long enough to trim and still window).
    """
    rng = np.random.default_rng(seed)
    n = int(duration_s * RATE_HZ)
    gravity = np.array([0.4, -1.8, 9.6]) + rng.normal(0.0, 0.3, size=3)
    xyz = np.tile(gravity, (n, 1)) + rng.normal(0.0, 0.12, size=(n, 3))
    spans = []
    gap = n // bites
    first_start = last_end = None
    for b in range(bites):
        start = b * gap + int(rng.integers(RATE_HZ, gap // 3))
        move = int(rng.uniform(0.9, 1.2) * RATE_HZ)
        hold = int(rng.uniform(0.5, 0.9) * RATE_HZ)
        amp = rng.uniform(2.8, 4.0)
        _raise_lower(xyz, start, move, amp)
        _raise_lower(xyz, start + move + hold, move, -amp)
        end = start + 2 * move + hold
        first_start = start if first_start is None else first_start
        last_end = end
        slop = int(rng.integers(5, 20))
        spans.append(
            AnnotationSpan(
                label="eating",
                reported_start_ms=max(0, (start - slop) * STEP_MS),
                reported_stop_ms=min(n - 1, end + slop) * STEP_MS,
                confirmed=False,
                span_id=b,
            )
        )
    if whole_session:
        slop = int(rng.integers(20, 60))
        spans = [
            AnnotationSpan(
                label="eating",
                reported_start_ms=max(0, (first_start - slop) * STEP_MS),
                reported_stop_ms=min(n - 1, last_end + slop) * STEP_MS,
                confirmed=False,
                span_id=0,
            )
        ]
    rec = RawRecording(
        device_id=device_id,
        t_ms=np.arange(n, dtype=np.int64) * STEP_MS,
        values=np.round(xyz, 6),
        nominal_rate_hz=float(RATE_HZ),
    )
    return rec, spans


def make_overfit_windows(
    n: int = 32, window: int = 150, seed: int = 0
) -> WindowedDataset:
    """Tiny linearly separable 2-class fixture for memorization checks."""
    rng = np.random.default_rng(seed)
    half = n // 2
    values = rng.normal(0.0, 0.05, size=(n, window, 3)).astype(np.float32)
    values[:half, :, 0] += 2.0
    values[half:, :, 0] -= 2.0
    labels = np.array([0] * half + [1] * (n - half), dtype=np.uint16)
    return WindowedDataset(
        values=values,
        labels=labels,
        class_map=ClassMap(names=("eating", "other"), positive_index=0),
        window_size=window,
        step=window,
        sources=[f"fixture+{i}" for i in range(n)],
    )
