"""
Similarity losses for embedding training and the classifier loss.
"""

from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from ..backends.statevector import StatevectorBackend
from ..core.errors import NumericError
from ..quantum.embeddings import EmbeddingSpec, Features

SimilarityFn = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True)
class PairBatch:
    """Index pairs into a split with delta = 1 iff the labels agree."""

    first: np.ndarray
    second: np.ndarray
    delta: np.ndarray

    def __post_init__(self) -> None:
        first = np.asarray(self.first, dtype=int)
        second = np.asarray(self.second, dtype=int)
        delta = np.asarray(self.delta, dtype=int)
        if not (first.shape == second.shape == delta.shape) or first.ndim != 1:
            raise NumericError("pair batch arrays must be 1D and of equal length")
        if np.any(first == second):
            raise NumericError("pair batch contains a sample paired with itself")
        if np.any((delta != 0) & (delta != 1)):
            raise NumericError("pair labels must be 0 or 1")
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)
        object.__setattr__(self, "delta", delta)

    def __len__(self) -> int:
        return self.first.shape[0]

    def reversed(self) -> "PairBatch":
        return PairBatch(self.second, self.first, self.delta)


def _similarity(spec: EmbeddingSpec, feat1: Features, feat2: Features, kind: str) -> float:
    return StatevectorBackend().similarity(spec, feat1, feat2, kind, with_grad=False).value


def fidelity_similarity(spec: EmbeddingSpec, feat1: Features, feat2: Features) -> float:
    """|<0|U(feat1)^dg U(feat2)|0>|^2."""
    return _similarity(spec, feat1, feat2, "fidelity")


def hs_similarity(spec: EmbeddingSpec, feat1: Features, feat2: Features, absolute: bool = False) -> float:
    """Re tr(U(feat1)^dg U(feat2)) / 2^n, or its modulus with ``absolute``."""
    return _similarity(spec, feat1, feat2, "hs_abs" if absolute else "hs")


def nqe_loss(similarity_fn: SimilarityFn, batch: PairBatch, features: np.ndarray) -> float:
    """Mean of (f(x_i, x_j) - delta_ij)^2 over the pairs; ``features`` rows are indexed by the batch."""
    if len(batch) == 0:
        raise NumericError("empty pair batch")
    residuals = [similarity_fn(features[i], features[j]) - d
                 for i, j, d in zip(batch.first, batch.second, batch.delta)]
    return float(np.mean(np.square(residuals)))


def vqa_mse_loss(predictions: Sequence[float], labels: Sequence[int]) -> float:
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if predictions.shape != labels.shape:
        raise NumericError(f"{predictions.shape[0]} predictions for {labels.shape[0]} labels")
    if predictions.size == 0:
        raise NumericError("empty prediction batch")
    return float(np.mean((predictions - labels) ** 2))


def vqa_mse_gradient(predictions: np.ndarray, labels: np.ndarray,
                     jacobian: np.ndarray) -> Tuple[float, np.ndarray]:
    """Loss and d loss / d theta given dp/dtheta rows for each sample."""
    loss = vqa_mse_loss(predictions, labels)
    residual = np.asarray(predictions, dtype=float) - np.asarray(labels, dtype=float)
    grad = 2.0 * residual @ jacobian / residual.shape[0]
    return loss, grad


def helstrom_error_bound(d_tr: float) -> float:
    """Minimum discrimination error 1/2 - D, clamped at zero."""
    if not 0.0 <= d_tr <= 1.0:
        raise NumericError(f"trace distance must lie in [0, 1], got {d_tr}")
    return max(0.0, 0.5 - d_tr)
