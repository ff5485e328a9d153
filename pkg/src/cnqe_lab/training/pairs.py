"""
Pair sampling for the embedding loss.
"""

import numpy as np

from ..core.errors import NumericError
from .losses import PairBatch


def sample_pairs(labels: np.ndarray, k: int, rng: np.random.Generator) -> PairBatch:
    """``k`` ordered pairs (i, j), i != j, uniform with replacement."""
    labels = np.asarray(labels, dtype=int)
    n = labels.shape[0]
    if n < 2:
        raise NumericError(f"pair sampling needs at least 2 samples, got {n}")
    if k < 1:
        raise NumericError(f"pair count must be positive, got {k}")
    first = rng.integers(0, n, size=k)
    # offset in [1, n) keeps the second index distinct and uniform
    second = (first + rng.integers(1, n, size=k)) % n
    return PairBatch(first, second, (labels[first] == labels[second]).astype(int))
