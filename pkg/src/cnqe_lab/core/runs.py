"""
Training run records: per-step history and the resulting checkpoint.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class HistoryEntry:
    """One logged value; ``step`` is an iteration (CNQE) or epoch (QCNN)."""

    step: int
    metric: str
    value: float

    def to_row(self, phase: str, run_id: int) -> List[Any]:
        return [phase, run_id, self.step, self.metric, repr(float(self.value))]


@dataclass
class TrainRun:
    """A training run of one phase ("cnqe", "qcnn", "baseline", "autoencoder")."""

    phase: str
    run_id: int
    seed: int
    weights: np.ndarray
    history: List[HistoryEntry] = field(default_factory=list)
    metrics: Dict[str, float] = field(default_factory=dict)
    best_step: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def record(self, step: int, metric: str, value: float) -> None:
        if self.history and step < self.history[-1].step:
            raise ValueError(f"history step {step} precedes {self.history[-1].step}")
        self.history.append(HistoryEntry(step, metric, float(value)))

    def series(self, metric: str) -> List[HistoryEntry]:
        return [entry for entry in self.history if entry.metric == metric]

    def last(self, metric: str, default: Optional[float] = None) -> Optional[float]:
        values = self.series(metric)
        return values[-1].value if values else default

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phase": self.phase,
            "run_id": self.run_id,
            "seed": self.seed,
            "weights": [float(w) for w in np.asarray(self.weights, dtype=float).reshape(-1)],
            "history": [[e.step, e.metric, e.value] for e in self.history],
            "metrics": {k: float(v) for k, v in self.metrics.items()},
            "best_step": self.best_step,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainRun":
        try:
            return cls(
                phase=data["phase"],
                run_id=int(data["run_id"]),
                seed=int(data["seed"]),
                weights=np.asarray(data["weights"], dtype=float),
                history=[HistoryEntry(int(s), str(m), float(v)) for s, m, v in data.get("history", [])],
                metrics={k: float(v) for k, v in data.get("metrics", {}).items()},
                best_step=data.get("best_step"),
                metadata=dict(data.get("metadata", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed run record: {exc}") from exc
