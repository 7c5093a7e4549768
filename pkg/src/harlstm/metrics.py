"""Confusion matrix and per-class evaluation metrics.

Metrics are computed in exact rational arithmetic from integer counts and
only converted to float at the rendering edge. Ratios of the form 0/0 are
reported as undefined (None), never coerced to 0 or 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LabelOutOfRangeError, LengthMismatchError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Integer counts, rows = true class, columns = predicted class."""

    counts: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        c = self.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise LabelOutOfRangeError(f"confusion counts must be square, got {c.shape}")
        if len(self.names) != c.shape[0]:
            raise LengthMismatchError("one name per class required")
        if np.any(c < 0):
            raise LabelOutOfRangeError("negative confusion count")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        return "\n".join(",".join(str(int(v)) for v in row) for row in self.counts) + "\n"


@dataclass(frozen=True)
class ClassMetrics:
    """One-vs-rest metrics for a single positive class; None = undefined."""

    name: str
    precision: Fraction | None
    recall: Fraction | None
    f_measure: Fraction | None
    specificity: Fraction | None
    accuracy: Fraction | None


@dataclass(frozen=True)
class EvalReport:
    beta: Fraction
    matrix: ConfusionMatrix
    per_class: tuple[ClassMetrics, ...]


def confusion(true_labels, predicted_labels, num_classes: int, names=None) -> ConfusionMatrix:
    """Count matrix[i][j] = occurrences of true class i predicted as j."""
    true_arr = np.asarray(true_labels, dtype=np.int64)
    pred_arr = np.asarray(predicted_labels, dtype=np.int64)
    if true_arr.shape != pred_arr.shape or true_arr.ndim != 1:
        raise LengthMismatchError(
            f"label lists differ: {true_arr.shape} vs {pred_arr.shape}"
        )
    if len(true_arr) and (
        true_arr.min() < 0 or pred_arr.min() < 0
        or true_arr.max() >= num_classes or pred_arr.max() >= num_classes
    ):
        raise LabelOutOfRangeError(f"labels outside [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (true_arr, pred_arr), 1)
    if names is None:
        names = tuple(f"class{i}" for i in range(num_classes))
    return ConfusionMatrix(counts=counts, names=tuple(names))


def ovr_counts(m: ConfusionMatrix, positive_class: int) -> tuple[int, int, int, int]:
    """(TP, FP, FN, TN) reading the matrix one-vs-rest for one class."""
    c = m.counts
    if not 0 <= positive_class < c.shape[0]:
        raise LabelOutOfRangeError(f"class {positive_class} outside matrix")
    tp = int(c[positive_class, positive_class])
    fn = int(c[positive_class].sum()) - tp
    fp = int(c[:, positive_class].sum()) - tp
    tn = m.total - tp - fn - fp
    return tp, fp, fn, tn


def _ratio(num: int, den: int) -> Fraction | None:
    return None if den == 0 else Fraction(num, den)


def metrics(m: ConfusionMatrix, positive_class: int, beta: Fraction | float = 1) -> ClassMetrics:
    """Accuracy, precision, recall, F-beta and specificity for one class.

    accuracy    = (TP+TN) / (TP+TN+FP+FN)
    precision   = TP / (TP+FP)
    recall      = TP / (TP+FN)
    F           = (1+beta^2) * recall * precision / (beta^2 * recall + precision)
    specificity = TN / (TN+FP)
    """
    beta = Fraction(beta) if not isinstance(beta, Fraction) else beta
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    tp, fp, fn, tn = ovr_counts(m, positive_class)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f_measure = None
    if precision is not None and recall is not None:
        denom = beta * beta * recall + precision
        if denom != 0:
            f_measure = (1 + beta * beta) * recall * precision / denom
    return ClassMetrics(
        name=m.names[positive_class],
        precision=precision,
        recall=recall,
        f_measure=f_measure,
        specificity=_ratio(tn, tn + fp),
        accuracy=_ratio(tp + tn, tp + tn + fp + fn),
    )


def f_measure(precision, recall, beta=1) -> Fraction:
    """F-beta from already-computed precision and recall."""
    p, r, b = Fraction(precision), Fraction(recall), Fraction(beta)
    return (1 + b * b) * r * p / (b * b * r + p)


def collapse_matrix(m: ConfusionMatrix, positive_class: int) -> ConfusionMatrix:
    """Two-class view: the positive class versus the union of the rest."""
    tp, fp, fn, tn = ovr_counts(m, positive_class)
    return ConfusionMatrix(
        counts=np.array([[tp, fn], [fp, tn]], dtype=np.int64),
        names=(m.names[positive_class], "other"),
    )


def eval_report(m: ConfusionMatrix, beta: Fraction | float = 1) -> EvalReport:
    """One-vs-rest metrics for every class of the matrix."""
    beta = Fraction(beta) if not isinstance(beta, Fraction) else beta
    return EvalReport(
        beta=beta,
        matrix=m,
        per_class=tuple(metrics(m, i, beta) for i in range(len(m.names))),
    )


def _cell(value: Fraction | None) -> str:
    return "n/a" if value is None else f"{float(value):.2f}"


def render_report(report: EvalReport) -> str:
    """Fixed-width table plus the confusion grid; pure function of the report."""
    headers = ("Precision", "Recall", "F-Measure", "Specificity", "Accuracy")
    name_w = max(8, *(len(c.name) for c in report.per_class))
    lines = [
        f"{'Activity':<{name_w}}  " + "  ".join(f"{h:>11}" for h in headers)
    ]
    for c in report.per_class:
        cells = (c.precision, c.recall, c.f_measure, c.specificity, c.accuracy)
        lines.append(
            f"{c.name:<{name_w}}  " + "  ".join(f"{_cell(v):>11}" for v in cells)
        )
    lines.append("")
    lines.append("Confusion matrix (rows = true, columns = predicted)")
    col_w = max(
        8, *(len(n) for n in report.matrix.names),
        *(len(str(int(v))) for v in report.matrix.counts.flat),
    )
    lines.append(
        f"{'':<{name_w}}  " + "  ".join(f"{n:>{col_w}}" for n in report.matrix.names)
    )
    for name, row in zip(report.matrix.names, report.matrix.counts):
        lines.append(
            f"{name:<{name_w}}  " + "  ".join(f"{int(v):>{col_w}}" for v in row)
        )
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport) -> dict:
    """Machine-readable variant carrying the same numbers as the table."""
    def num(v):
        return None if v is None else float(v)

    return {
        "beta": float(report.beta),
        "classes": [
            {
                "name": c.name,
                "precision": num(c.precision),
                "recall": num(c.recall),
                "f_measure": num(c.f_measure),
                "specificity": num(c.specificity),
                "accuracy": num(c.accuracy),
            }
            for c in report.per_class
        ],
        "confusion": report.matrix.counts.tolist(),
        "class_names": list(report.matrix.names),
    }


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
