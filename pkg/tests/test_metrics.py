from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harlstm.errors import LabelOutOfRangeError, LengthMismatchError
from harlstm.metrics import (
    ConfusionMatrix,
    collapse_matrix,
    confusion,
    eval_report,
    f_measure,
    metrics,
    ovr_counts,
    render_report,
    report_to_dict,
    render_report as render,
)

# the published two-class confusion counts used as a fixture throughout:
# eating->eating 5286, eating->other 288, other->eating 792, other->other 13587
FIX_COUNTS = np.array([[5286, 288], [792, 13587]], dtype=np.int64)
FIX = ConfusionMatrix(counts=FIX_COUNTS, names=("eating", "other"))


def labels_for(counts):
    true, pred = [], []
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            true += [i] * int(counts[i, j])
            pred += [j] * int(counts[i, j])
    return true, pred


class TestConfusion:
    def test_perfect_is_diagonal(self):
        m = confusion([0, 1, 1, 0], [0, 1, 1, 0], 2)
        assert np.array_equal(m.counts, [[2, 0], [0, 2]])

    def test_hand_count(self):
        m = confusion([0, 0, 1], [0, 1, 1], 2)
        assert np.array_equal(m.counts, [[1, 1], [0, 1]])

    def test_fixture_counts_reproduced_from_label_lists(self):
        true, pred = labels_for(FIX_COUNTS)
        m = confusion(true, pred, 2, names=("eating", "other"))
        assert np.array_equal(m.counts, FIX_COUNTS)
        assert m.total == 19953

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            confusion([0, 1], [0], 2)

    def test_label_out_of_range(self):
        with pytest.raises(LabelOutOfRangeError):
            confusion([0, 2], [0, 1], 2)


class TestOvrCounts:
    def test_fixture_positive_eating(self):
        tp, fp, fn, tn = ovr_counts(FIX, 0)
        assert (tp, fp, fn, tn) == (5286, 792, 288, 13587)

    def test_fixture_positive_other_is_symmetric(self):
        tp, fp, fn, tn = ovr_counts(FIX, 1)
        assert (tp, fp, fn, tn) == (13587, 288, 792, 5286)

    def test_diagonal_has_no_errors(self):
        m = ConfusionMatrix(np.diag([4, 9]).astype(np.int64), ("a", "b"))
        tp, fp, fn, tn = ovr_counts(m, 0)
        assert fp == 0 and fn == 0

    def test_cells_sum_to_total(self):
        assert sum(ovr_counts(FIX, 0)) == FIX.total


class TestMetrics:
    def test_fixture_eating_metrics_exact(self):
        m = metrics(FIX, 0, beta=1)
        assert m.precision == Fraction(5286, 6078)
        assert m.recall == Fraction(5286, 5574)
        assert m.accuracy == Fraction(18873, 19953)
        assert m.specificity == Fraction(13587, 14379)
        assert float(m.precision) == pytest.approx(0.8697, abs=5e-5)
        assert float(m.recall) == pytest.approx(0.9483, abs=5e-5)
        assert float(m.accuracy) == pytest.approx(0.9459, abs=5e-5)
        assert float(m.specificity) == pytest.approx(0.9449, abs=5e-5)

    def test_published_f_measure_row(self):
        f = f_measure(Fraction(89, 100), Fraction(97, 100), 1)
        assert round(float(f), 2) == 0.93

    def test_beta_two_weighting(self):
        f = f_measure(Fraction(1, 2), Fraction(1), 2)
        assert f == Fraction(5, 2) / Fraction(9, 2)
        assert float(f) == pytest.approx(0.5556, abs=5e-5)

    def test_equal_precision_recall_fixed_point(self):
        for num, den in ((1, 2), (3, 4), (1, 1), (7, 9)):
            x = Fraction(num, den)
            assert f_measure(x, x, 1) == x

    def test_undefined_precision_reported_as_none(self):
        m = ConfusionMatrix(np.array([[0, 3], [0, 7]]), ("pos", "neg"))
        entry = metrics(m, 0, 1)
        assert entry.precision is None  # no positive predictions at all
        assert entry.recall == 0
        assert entry.f_measure is None

    def test_f_undefined_when_both_zero(self):
        m = ConfusionMatrix(np.array([[0, 3], [2, 7]]), ("pos", "neg"))
        entry = metrics(m, 0, 1)
        assert entry.precision == 0 and entry.recall == 0
        assert entry.f_measure is None

    def test_specificity_equals_recall_of_other_class(self):
        entry0 = metrics(FIX, 0, 1)
        entry1 = metrics(FIX, 1, 1)
        assert entry0.specificity == entry1.recall
        assert entry1.specificity == entry0.recall

    def test_bad_beta(self):
        with pytest.raises(ValueError):
            metrics(FIX, 0, 0)

    @given(
        cells=st.lists(st.integers(min_value=0, max_value=500), min_size=4, max_size=4)
    )
    @settings(max_examples=120)
    def test_two_class_identities(self, cells):
        counts = np.array(cells, dtype=np.int64).reshape(2, 2)
        m = ConfusionMatrix(counts, ("pos", "neg"))
        entry = metrics(m, 0, 1)
        tp, fp, fn, tn = ovr_counts(m, 0)
        if tp + fp:
            assert entry.precision == Fraction(tp, tp + fp)
        else:
            assert entry.precision is None
        # swap classes and positive designation: metrics must be identical
        swapped = ConfusionMatrix(counts[::-1, ::-1].copy(), ("neg", "pos"))
        entry_sw = metrics(swapped, 1, 1)
        assert entry_sw.precision == entry.precision
        assert entry_sw.recall == entry.recall
        assert entry_sw.f_measure == entry.f_measure
        assert entry_sw.specificity == entry.specificity
        assert entry_sw.accuracy == entry.accuracy
        # F lies between precision and recall when all are defined
        if entry.precision is not None and entry.recall is not None and entry.f_measure is not None:
            lo = min(entry.precision, entry.recall)
            hi = max(entry.precision, entry.recall)
            assert lo <= entry.f_measure <= hi
            assert entry.f_measure == f_measure(entry.recall, entry.precision, 1)


class TestRenderReport:
    def test_published_row_values_render(self):
        # feeding the published table's values straight through the renderer
        report = eval_report(FIX, 1)
        text = render_report(report)
        assert "Precision" in text and "Specificity" in text
        row = [l for l in text.splitlines() if l.startswith("eating")][0]
        assert row.split() == ["eating", "0.87", "0.95", "0.91", "0.94", "0.95"]

    def test_direct_values_format_two_decimals(self):
        assert f"{float(f_measure(Fraction(89,100), Fraction(97,100), 1)):.2f}" == "0.93"

    def test_undefined_renders_na(self):
        m = ConfusionMatrix(np.array([[0, 3], [0, 7]]), ("pos", "neg"))
        text = render_report(eval_report(m, 1))
        row = [l for l in text.splitlines() if l.startswith("pos")][0]
        assert "n/a" in row
        assert "0.00" not in row.split()[1]

    def test_pure_function(self):
        report = eval_report(FIX, 1)
        assert render(report) == render(report)

    def test_confusion_grid_included(self):
        text = render_report(eval_report(FIX, 1))
        assert "5286" in text and "13587" in text
        assert "rows = true" in text

    def test_matrix_csv(self):
        assert FIX.to_csv() == "5286,288\n792,13587\n"

    def test_machine_readable_matches_table(self):
        d = report_to_dict(eval_report(FIX, 1))
        assert d["beta"] == 1.0
        eating = d["classes"][0]
        assert eating["precision"] == pytest.approx(5286 / 6078)
        assert d["confusion"] == [[5286, 288], [792, 13587]]


class TestCollapse:
    def test_collapse_multiclass(self):
        counts = np.array(
            [[50, 2, 3], [4, 60, 6], [7, 8, 70]], dtype=np.int64
        )
        m = ConfusionMatrix(counts, ("eating", "smoking", "jogging"))
        c = collapse_matrix(m, 0)
        assert c.names == ("eating", "other")
        assert np.array_equal(c.counts, [[50, 5], [11, 144]])
        assert c.total == m.total

    def test_collapse_preserves_ovr_metrics(self):
        counts = np.array([[9, 1, 0], [2, 8, 1], [0, 3, 6]], dtype=np.int64)
        m = ConfusionMatrix(counts, ("a", "b", "c"))
        for k in range(3):
            direct = metrics(m, k, 1)
            via_collapse = metrics(collapse_matrix(m, k), 0, 1)
            assert direct.precision == via_collapse.precision
            assert direct.recall == via_collapse.recall
            assert direct.accuracy == via_collapse.accuracy
            assert direct.specificity == via_collapse.specificity
