import pytest

from cnqe_lab.core.errors import NumericError
from cnqe_lab.metrics.classification import accuracy, classification_report


def test_all_positive_predictions():
    report = classification_report([1, 1, 1, 1], [1, 0, 1, 0])
    assert report.accuracy == 0.5
    assert report.precision == 0.5
    assert report.recall == 1.0
    assert report.f1 == pytest.approx(2 / 3)
    assert not report.zero_division


def test_no_positive_predictions_flags_zero_division():
    report = classification_report([0, 0, 0], [1, 0, 1])
    assert report.precision == 0.0
    assert report.recall == 0.0
    assert report.f1 == 0.0
    assert report.zero_division
    assert report.to_dict()["zero_division"] is True


def test_perfect_predictions():
    report = classification_report([0, 1, 1, 0], [0, 1, 1, 0])
    assert (report.accuracy, report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0, 1.0)


def test_mismatched_and_empty_inputs():
    with pytest.raises(NumericError):
        classification_report([1, 0], [1])
    with pytest.raises(NumericError):
        classification_report([], [])
    assert accuracy([], []) == 0.0
    assert accuracy([1, 0, 1], [1, 1, 1]) == pytest.approx(2 / 3)
