"""
Statistical comparison of run groups: Welch tests, Bonferroni adjustment
and trace-distance / accuracy correlations.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy import stats

from ..core.errors import NumericError

logger = logging.getLogger(__name__)

COMPONENTS = ("interface", "loss_kind", "feature_map")


@dataclass(frozen=True)
class WelchResult:
    t: float
    dof: float
    p_value: float


@dataclass(frozen=True)
class CorrelationResult:
    pearson_r: float
    pearson_p: float
    spearman_rho: float
    spearman_p: float
    n: int

    def to_dict(self) -> Dict[str, float]:
        return {"pearson_r": self.pearson_r, "pearson_p": self.pearson_p,
                "spearman_rho": self.spearman_rho, "spearman_p": self.spearman_p, "n": self.n}


@dataclass(frozen=True)
class LevelSummary:
    level: str
    n: int
    mean: float
    std: float


@dataclass(frozen=True)
class Comparison:
    first: str
    second: str
    t: float
    dof: float
    p_raw: float
    p_adjusted: float

    @property
    def label(self) -> str:
        return f"{self.first} vs {self.second}"


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> WelchResult:
    """Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise NumericError(f"Welch test needs two samples of size >= 2, got {a.size} and {b.size}")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        dof = float(a.size + b.size - 2)
        if diff == 0.0:
            return WelchResult(0.0, dof, 1.0)
        return WelchResult(float(np.copysign(np.inf, diff)), dof, 0.0)
    t = diff / np.sqrt(se2)
    dof = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), dof)
    return WelchResult(float(t), float(dof), float(min(1.0, p)))


def bonferroni(p_values: Sequence[float], m: int) -> List[float]:
    """min(1, m p) for every p."""
    p = np.asarray(p_values, dtype=float)
    if m < p.size:
        raise NumericError(f"Bonferroni factor {m} is smaller than the {p.size} comparisons")
    return [float(v) for v in np.minimum(1.0, m * p)]


def correlations(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Pearson r and Spearman rho (average ranks for ties) with their p-values."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise NumericError("correlation inputs must be 1D and of equal length")
    if xs.size < 3:
        raise NumericError(f"correlation needs at least 3 points, got {xs.size}")
    if np.ptp(xs) == 0.0 or np.ptp(ys) == 0.0:
        raise NumericError("correlation of a constant input is undefined")
    pearson = stats.pearsonr(xs, ys)
    spearman = stats.spearmanr(xs, ys)
    return CorrelationResult(float(pearson[0]), float(pearson[1]),
                             float(spearman[0]), float(spearman[1]), int(xs.size))


def compare_groups(groups: Mapping[str, Sequence[float]]) -> List[Comparison]:
    """All pairwise Welch tests in sorted level order, Bonferroni-adjusted over the pair count."""
    levels = sorted(groups)
    pairs = list(itertools.combinations(levels, 2))
    tests = [welch_t_test(groups[a], groups[b]) for a, b in pairs]
    adjusted = bonferroni([t.p_value for t in tests], len(pairs)) if pairs else []
    return [Comparison(a, b, r.t, r.dof, r.p_value, adj)
            for (a, b), r, adj in zip(pairs, tests, adjusted)]


def component_summary(records: Sequence[Mapping[str, Any]], component: str,
                      metric: str = "trace_distance") -> Tuple[List[LevelSummary], List[Comparison]]:
    """Per-level statistics of ``metric`` grouped by one architectural component."""
    if component not in COMPONENTS:
        raise NumericError(f"unknown component '{component}' (choose from {', '.join(COMPONENTS)})")
    groups: Dict[str, List[float]] = {}
    for record in records:
        groups.setdefault(str(record[component]), []).append(float(record[metric]))
    summary = []
    for level in sorted(groups):
        values = np.asarray(groups[level])
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        summary.append(LevelSummary(level, int(values.size), float(values.mean()), std))
    comparable = {k: v for k, v in groups.items() if len(v) >= 2}
    if len(comparable) < len(groups):
        logger.warning(f"Skipping levels with fewer than two runs in {component} comparisons")
    return summary, compare_groups(comparable)
