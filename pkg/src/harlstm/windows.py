"""Sliding-window segmentation, class balancing, splitting, dataset files.

Segments become fixed-shape overlapping windows ([W x 3] float32) with mode
labels and one-hot targets. Balancing duplicates whole minority segments
until projected window counts level out; splitting is a seeded shuffle at
window level. Datasets round-trip through the BWDS binary container
(layout in docs/formats.md).
"""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadGeometryError,
    CorruptChecksumError,
    DegenerateSplitError,
    EmptyClassError,
    IndexOutOfRangeError,
    ShapeMismatchError,
    VersionMismatchError,
)
from .ingest import LabeledSegment

BWDS_MAGIC = b"BWDS"
BWDS_VERSION = 1


@dataclass(frozen=True)
class ClassMap:
    """Ordered activity names plus the designated positive class."""

    names: tuple[str, ...]
    positive_index: int

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate class names in {self.names}")
        if not 0 <= self.positive_index < len(self.names):
            raise ValueError(f"positive index {self.positive_index} out of range")

    @classmethod
    def from_labels(cls, names, positive: str) -> "ClassMap":
        names = tuple(n.lower() for n in names)
        if positive.lower() not in names:
            raise ValueError(f"positive class {positive!r} not in {names}")
        return cls(names=names, positive_index=names.index(positive.lower()))

    def __len__(self) -> int:
        return len(self.names)

    @property
    def positive(self) -> str:
        return self.names[self.positive_index]

    def index_of(self, label: str) -> int:
        return self.names.index(label.lower())


@dataclass(frozen=True)
class Window:
    """One [W x 3] slice of a segment (rows in time order, columns x,y,z)."""

    values: np.ndarray
    label_index: int
    source: str


@dataclass
class WindowedDataset:
    """N windows with integer labels, one-hot targets and a class map."""

    values: np.ndarray            # float32 [N, W, 3]
    labels: np.ndarray            # uint16 [N]
    class_map: ClassMap
    window_size: int
    step: int
    sources: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.values.ndim != 3 or self.values.shape[2] != 3:
            raise ShapeMismatchError(f"window tensor has shape {self.values.shape}")
        if self.values.shape[1] != self.window_size:
            raise ShapeMismatchError(
                f"window rows {self.values.shape[1]} != window size {self.window_size}"
            )
        if len(self.labels) != len(self.values):
            raise ShapeMismatchError("label count != window count")
        if len(self.labels) and int(self.labels.max()) >= len(self.class_map):
            raise IndexOutOfRangeError("label index outside class map")
        if not self.sources:
            self.sources = [""] * len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def targets(self) -> np.ndarray:
        """One-hot [N x C] float32 matrix."""
        return np.eye(len(self.class_map), dtype=np.float32)[self.labels]

    def window(self, i: int) -> Window:
        return Window(self.values[i], int(self.labels[i]), self.sources[i])

    def subset(self, indices: np.ndarray) -> "WindowedDataset":
        return WindowedDataset(
            values=self.values[indices],
            labels=self.labels[indices],
            class_map=self.class_map,
            window_size=self.window_size,
            step=self.step,
            sources=[self.sources[i] for i in indices],
        )

    def class_counts(self) -> dict[str, int]:
        counts = Counter(int(l) for l in self.labels)
        return {name: counts.get(i, 0) for i, name in enumerate(self.class_map.names)}

    def collapse_to_binary(self) -> "WindowedDataset":
        """Two-class view: the positive class versus everything else.

        Index 0 becomes the positive class, index 1 "other"; used for the
        two-neuron output head.
        """
        binary = ClassMap(names=(self.class_map.positive, "other"), positive_index=0)
        labels = np.where(self.labels == self.class_map.positive_index, 0, 1).astype(
            np.uint16
        )
        return WindowedDataset(
            values=self.values,
            labels=labels,
            class_map=binary,
            window_size=self.window_size,
            step=self.step,
            sources=list(self.sources),
        )


@dataclass(frozen=True)
class SplitPair:
    train: WindowedDataset
    test: WindowedDataset
    seed: int


def window_count(length: int, size: int, step: int) -> int:
    """Closed-form number of windows a segment of ``length`` yields."""
    if size <= 0 or step <= 0:
        raise BadGeometryError(f"window size {size} and step {step} must be positive")
    if length < size:
        return 0
    return (length - size) // step + 1


def mode_label(labels: list[str]) -> str:
    """Most frequent label; ties go to the tied label seen latest."""
    if not labels:
        raise ValueError("mode of an empty label list")
    counts = Counter(labels)
    best = max(counts.values())
    tied = {l for l, c in counts.items() if c == best}
    for label in reversed(labels):
        if label in tied:
            return label
    raise AssertionError("unreachable")


def one_hot(label_index: int, num_classes: int) -> np.ndarray:
    if not 0 <= label_index < num_classes:
        raise IndexOutOfRangeError(
            f"label index {label_index} outside [0, {num_classes})"
        )
    v = np.zeros(num_classes, dtype=np.float32)
    v[label_index] = 1.0
    return v


def slide(
    segments: list[LabeledSegment],
    class_map: ClassMap,
    size: int = 150,
    step: int = 10,
) -> WindowedDataset:
    """Cut every segment into overlapping [size x 3] windows.

    Window k of a segment covers sample indices [k*step, k*step + size);
    windows never span two segments. Segments shorter than ``size``
    contribute nothing.
    """
    if size <= 0 or step <= 0 or step > size:
        raise BadGeometryError(f"need 0 < step <= size, got size={size} step={step}")
    chunks: list[np.ndarray] = []
    labels: list[int] = []
    sources: list[str] = []
    for seg in segments:
        n = window_count(len(seg), size, step)
        if n == 0:
            continue
        strided = np.lib.stride_tricks.sliding_window_view(
            seg.values, size, axis=0
        )  # [L-size+1, 3, size]
        windows = strided[:: step][:n].transpose(0, 2, 1).astype(np.float32)
        chunks.append(windows)
        row_labels = [seg.label] * size
        for k in range(n):
            labels.append(class_map.index_of(mode_label(row_labels)))
            sources.append(f"{seg.source}+{k * step}")
    if chunks:
        values = np.concatenate(chunks, axis=0)
    else:
        values = np.empty((0, size, 3), dtype=np.float32)
    return WindowedDataset(
        values=values,
        labels=np.asarray(labels, dtype=np.uint16),
        class_map=class_map,
        window_size=size,
        step=step,
        sources=sources,
    )


def balance(
    segments: list[LabeledSegment],
    seed: int,
    size: int = 150,
    step: int = 10,
) -> list[LabeledSegment]:
    """Duplicate whole minority-class segments until classes level out.

    For each class below the majority's projected window count, segments are
    drawn uniformly at random (seeded, with replacement) and appended until
    the class first reaches or exceeds the majority. The majority class and
    the original segment order are untouched; output is deterministic per
    seed.
    """
    by_class: dict[str, list[LabeledSegment]] = {}
    for seg in segments:
        by_class.setdefault(seg.label, []).append(seg)
    if not by_class:
        raise EmptyClassError("no segments at all")
    projected = {
        label: sum(window_count(len(s), size, step) for s in segs)
        for label, segs in by_class.items()
    }
    majority = max(projected.values())
    rng = np.random.default_rng(seed)
    out = list(segments)
    for label in sorted(by_class):
        count = projected[label]
        if count >= majority:
            continue
        candidates = [
            s for s in by_class[label] if window_count(len(s), size, step) > 0
        ]
        if not candidates:
            raise EmptyClassError(
                f"class {label!r} has no segment long enough for a {size}-sample window"
            )
        while count < majority:
            pick = candidates[int(rng.integers(len(candidates)))]
            out.append(pick)
            count += window_count(len(pick), size, step)
    return out


def split(ds: WindowedDataset, ratio: float = 0.8, seed: int = 0) -> SplitPair:
    """Seeded uniform shuffle; first round(ratio*N) windows train, rest test."""
    if not 0.0 < ratio < 1.0:
        raise DegenerateSplitError(f"ratio {ratio} outside (0, 1)")
    n = len(ds)
    if n < 2:
        raise DegenerateSplitError(f"cannot split {n} windows")
    n_train = int(round(ratio * n))
    if n_train == 0 or n_train == n:
        raise DegenerateSplitError(
            f"ratio {ratio} leaves an empty side for {n} windows"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return SplitPair(
        train=ds.subset(perm[:n_train]),
        test=ds.subset(perm[n_train:]),
        seed=seed,
    )


# --- BWDS container ----------------------------------------------------------

def write_dataset(ds: WindowedDataset) -> bytes:
    """Encode as a BWDS v1 byte string (little-endian throughout)."""
    header = bytearray()
    header += BWDS_MAGIC
    header += struct.pack("<H", BWDS_VERSION)
    header += struct.pack(
        "<IIII", len(ds), ds.window_size, len(ds.class_map), ds.step
    )
    header += struct.pack("<H", ds.class_map.positive_index)
    for name in ds.class_map.names:
        raw = name.encode("utf-8")
        header += struct.pack("<H", len(raw)) + raw
    values = np.ascontiguousarray(ds.values, dtype="<f4")
    labels = np.ascontiguousarray(ds.labels, dtype="<u2")
    return bytes(header) + values.tobytes() + labels.tobytes()


def read_dataset(blob: bytes) -> WindowedDataset:
    """Decode a BWDS byte string; strict about length and version."""
    if blob[:4] != BWDS_MAGIC:
        raise CorruptChecksumError("not a BWDS container")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != BWDS_VERSION:
        raise VersionMismatchError(f"BWDS version {version}, supported {BWDS_VERSION}")
    n, size, num_classes, step = struct.unpack_from("<IIII", blob, 6)
    offset = 22
    (positive_index,) = struct.unpack_from("<H", blob, offset)
    offset += 2
    names = []
    for _ in range(num_classes):
        (length,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        names.append(blob[offset : offset + length].decode("utf-8"))
        offset += length
    values_bytes = n * size * 3 * 4
    labels_bytes = n * 2
    if len(blob) != offset + values_bytes + labels_bytes:
        raise CorruptChecksumError(
            f"container length {len(blob)} != expected {offset + values_bytes + labels_bytes}"
        )
    values = np.frombuffer(blob, dtype="<f4", count=n * size * 3, offset=offset)
    values = values.reshape(n, size, 3).copy()
    labels = np.frombuffer(
        blob, dtype="<u2", count=n, offset=offset + values_bytes
    ).copy()
    return WindowedDataset(
        values=values,
        labels=labels,
        class_map=ClassMap(names=tuple(names), positive_index=positive_index),
        window_size=size,
        step=step,
    )


def save_dataset(ds: WindowedDataset, path) -> None:
    from .manifest import atomic_write_bytes

    atomic_write_bytes(path, write_dataset(ds))


def load_dataset(path) -> WindowedDataset:
    with open(path, "rb") as fh:
        return read_dataset(fh.read())
