"""
Summaries and report tables emitted by the command line.
"""

from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ..core.config import ExperimentConfig
from ..core.errors import DataError
from ..core.runs import TrainRun
from ..metrics.stats import COMPONENTS, Comparison, component_summary, correlations
from ..quantum.fourier import ReconstructionCheck, SpectralSummary, Spectrum

STATS_HEADER = ("component", "comparison", "t", "dof", "p_raw", "p_adjusted")
LEVELS_HEADER = ("component", "level", "n", "mean", "std")
RUNS_HEADER = ("configuration", "interface", "loss_kind", "feature_map", "margin_sigma", "run_id",
               "trace_distance", "accuracy")
POINTS_HEADER = ("configuration", "trace_distance", "accuracy")
FOURIER_CHECK_HEADER = ("layout", "n_qubits", "n_layers", "n_frequencies", "max_error")
SPECTRUM_HEADER = ("frequency", "real", "imag", "magnitude")
SPECTRAL_SUMMARY_HEADER = ("kind", "n_qubits", "n_inputs", "n_frequencies", "max_degree", "exact",
                           "unit_frequencies")


def _stats(values: Sequence[float]) -> Dict[str, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"mean": float("nan"), "std": float("nan")}
    return {"mean": float(arr.mean()), "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0}


def train_summary(config: ExperimentConfig, cnqe_runs: Sequence[TrainRun], selected: TrainRun,
                  qcnn_runs: Sequence[TrainRun]) -> Dict[str, Any]:
    accuracies = [run.metrics["test_accuracy"] for run in qcnn_runs]
    accuracy = _stats(accuracies)
    return {
        "command": "train",
        "config": config.model_dump(mode="json"),
        "cnqe": {
            "trace_distances": [run.metrics["trace_distance"] for run in cnqe_runs],
            "selected_run": selected.run_id,
            "best_step": selected.best_step,
        },
        "qcnn": {
            "test_accuracies": accuracies,
            "train_accuracies": [run.metrics["train_accuracy"] for run in qcnn_runs],
            "n_params": int(qcnn_runs[0].metrics["n_params"]) if qcnn_runs else 0,
        },
        "trace_distance": selected.metrics["trace_distance"],
        "accuracy": accuracy["mean"],
        "accuracy_std": accuracy["std"],
    }


def baseline_summary(config: ExperimentConfig, selected: TrainRun, head_runs: Sequence[TrainRun]) -> Dict[str, Any]:
    accuracy = _stats([run.metrics["test_accuracy"] for run in head_runs])
    metrics = {key: _stats([run.metrics[key] for run in head_runs])["mean"] for key in ("precision", "recall", "f1")}
    return {
        "command": "baseline",
        "config": config.model_dump(mode="json"),
        "head": head_runs[0].metadata["head"] if head_runs else None,
        "n_params": int(head_runs[0].metrics["n_params"]) if head_runs else 0,
        "cnqe": {"selected_run": selected.run_id, "best_step": selected.best_step},
        "trace_distance": selected.metrics["trace_distance"],
        "accuracy": accuracy["mean"],
        "accuracy_std": accuracy["std"],
        **metrics,
    }


def autoencoder_summary(config: ExperimentConfig, ae_run: TrainRun, qcnn_runs: Sequence[TrainRun]) -> Dict[str, Any]:
    accuracy = _stats([run.metrics["test_accuracy"] for run in qcnn_runs])
    return {
        "command": "baseline",
        "config": config.model_dump(mode="json"),
        "latent_dim": int(ae_run.metadata["latent_dim"]),
        "final_mse": ae_run.metrics["final_mse"],
        "trace_distance": ae_run.metrics["trace_distance"],
        "accuracy": accuracy["mean"],
        "accuracy_std": accuracy["std"],
        "qcnn": {"test_accuracies": [run.metrics["test_accuracy"] for run in qcnn_runs]},
    }


def component_rows(records: Sequence[Mapping[str, Any]],
                   components: Sequence[str] = COMPONENTS) -> Tuple[List[List[Any]], List[List[Any]]]:
    """Level and pairwise-test rows for every component present in ``records``."""
    level_rows: List[List[Any]] = []
    test_rows: List[List[Any]] = []
    for component in components:
        if not records or component not in records[0]:
            continue
        levels, comparisons = component_summary(records, component)
        level_rows += [[component, lv.level, lv.n, lv.mean, lv.std] for lv in levels]
        test_rows += [_comparison_row(component, c) for c in comparisons]
    return level_rows, test_rows


def _comparison_row(component: str, c: Comparison) -> List[Any]:
    return [component, c.label, c.t, c.dof, c.p_raw, c.p_adjusted]


def records_from_rows(rows: Sequence[Mapping[str, str]]) -> List[Dict[str, Any]]:
    """Per-run records from a runs CSV; ``trace_distance`` must be numeric."""
    if rows and "trace_distance" not in rows[0]:
        raise DataError("runs CSV needs a trace_distance column")
    records = []
    for i, row in enumerate(rows):
        try:
            record: Dict[str, Any] = dict(row)
            record["trace_distance"] = float(row["trace_distance"])
        except (TypeError, ValueError) as exc:
            raise DataError(f"row {i + 1}: malformed trace_distance: {exc}") from exc
        records.append(record)
    return records


def records_from_history(rows: Sequence[Mapping[str, str]], summary: Mapping[str, Any]) -> List[Dict[str, Any]]:
    """Per-run records from a ``train`` history CSV; component levels come from its summary.

    A run's trace distance is its best recorded evaluation, the value its checkpoint keeps.
    """
    try:
        train = summary["config"]["train"]
        levels = {component: str(train[component]) for component in COMPONENTS}
    except (KeyError, TypeError) as exc:
        raise DataError(f"summary lacks the training configuration: {exc}") from exc
    best: Dict[int, float] = {}
    for i, row in enumerate(rows):
        if row.get("phase") != "cnqe" or row.get("metric") != "trace_distance":
            continue
        try:
            run_id, value = int(row["run_id"]), float(row["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"row {i + 1}: malformed history entry: {exc}") from exc
        best[run_id] = max(value, best.get(run_id, value))
    if not best:
        raise DataError("history holds no cnqe trace_distance entries")
    return [{**levels, "run_id": run_id, "trace_distance": best[run_id]} for run_id in sorted(best)]


def correlation_report(points: Sequence[Tuple[str, float, float]]) -> Dict[str, Any]:
    result = correlations([p[1] for p in points], [p[2] for p in points])
    return result.to_dict()


def fourier_check_row(check: ReconstructionCheck) -> List[Any]:
    return [check.name, check.n_qubits, check.n_layers, check.n_frequencies, check.max_error]


def spectrum_rows(spectrum: Spectrum) -> List[List[Any]]:
    rows = []
    for entry in spectrum.entries:
        frequency = " ".join(repr(float(v)) for v in entry.frequency)
        c = complex(entry.coefficient)
        rows.append([frequency, c.real, c.imag, abs(c)])
    return rows


def spectral_summary_row(summary: SpectralSummary) -> List[Any]:
    return [summary.kind, summary.n_qubits, summary.n_inputs, summary.n_frequencies, summary.max_degree,
            summary.exact, " ".join(str(c) for c in summary.unit_frequencies)]
