"""
Binary classification metrics with label 1 as the positive class.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Sequence

import numpy as np

from ..core.errors import NumericError


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    zero_division: bool = False

    def to_dict(self) -> Dict[str, float]:
        data = asdict(self)
        data["zero_division"] = bool(self.zero_division)
        return data


def classification_report(predictions: Sequence[int], labels: Sequence[int]) -> ClassificationReport:
    """Accuracy, precision, recall and F1; an undefined ratio is 0 and sets ``zero_division``."""
    pred = np.asarray(predictions, dtype=int)
    true = np.asarray(labels, dtype=int)
    if pred.shape != true.shape:
        raise NumericError(f"{pred.shape[0]} predictions for {true.shape[0]} labels")
    if pred.size == 0:
        raise NumericError("classification report of an empty set")

    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    flagged = False

    def ratio(num: int, den: int) -> float:
        nonlocal flagged
        if den == 0:
            flagged = True
            return 0.0
        return num / den

    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    f1 = ratio(2 * tp, 2 * tp + fp + fn)
    accuracy = float(np.mean(pred == true))
    return ClassificationReport(accuracy, precision, recall, f1, flagged)


def accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    pred = np.asarray(predictions, dtype=int)
    true = np.asarray(labels, dtype=int)
    if pred.shape != true.shape:
        raise NumericError(f"{pred.shape[0]} predictions for {true.shape[0]} labels")
    return float(np.mean(pred == true)) if pred.size else 0.0
