"""
Finite-difference checks for reverse-mode gradients.
"""

from typing import Callable, Optional, Tuple

import numpy as np

GradFn = Callable[[np.ndarray], Tuple[float, np.ndarray]]


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """max |a - n| / max(|a|, |n|, floor) over coordinates."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale)) if analytic.size else 0.0


def central_differences(fn: Callable[[np.ndarray], float], weights: np.ndarray, h: float = 1e-5,
                        coordinates: Optional[np.ndarray] = None) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    grad = np.zeros_like(weights)
    index = np.arange(weights.size) if coordinates is None else np.asarray(coordinates)
    shifted = weights.copy()
    for i in index:
        shifted[i] = weights[i] + h
        up = fn(shifted)
        shifted[i] = weights[i] - h
        down = fn(shifted)
        shifted[i] = weights[i]
        grad[i] = (up - down) / (2 * h)
    return grad


def grad_check(fn: GradFn, weights: np.ndarray, h: float = 1e-5,
               coordinates: Optional[np.ndarray] = None, floor: float = 1e-8) -> float:
    """
    Compare the gradient returned by ``fn`` with central differences.

    ``fn(weights)`` returns (value, gradient). ``coordinates`` restricts the
    comparison to a subset of indices for large parameter vectors.
    Returns the maximum relative error over the compared coordinates.
    """
    weights = np.asarray(weights, dtype=float)
    _, analytic = fn(weights)
    numeric = central_differences(lambda w: fn(w)[0], weights, h, coordinates)
    analytic = np.asarray(analytic, dtype=float)
    if coordinates is not None:
        analytic, numeric = analytic[coordinates], numeric[coordinates]
    return relative_error(analytic, numeric, floor)
