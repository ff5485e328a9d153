"""Distances, classification metrics and statistics."""

from .distance import EnsemblePair, trace_distance, helstrom_optimal_accuracy
from .classification import ClassificationReport, classification_report
from .stats import welch_t_test, bonferroni, correlations

__all__ = [
    "EnsemblePair",
    "trace_distance",
    "helstrom_optimal_accuracy",
    "ClassificationReport",
    "classification_report",
    "welch_t_test",
    "bonferroni",
    "correlations",
]
