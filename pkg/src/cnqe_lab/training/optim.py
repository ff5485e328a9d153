"""
Adam optimizer over flat parameter vectors.
"""

from dataclasses import dataclass, field

import numpy as np

from ..core.errors import NumericError


@dataclass
class AdamState:
    size: int
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None)  # type: ignore[assignment]
    v: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)
        if self.m.shape != (self.size,) or self.v.shape != (self.size,):
            raise NumericError("Adam moments must match the parameter count")


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray, lr: float) -> np.ndarray:
    """Bias-corrected Adam update; returns new parameters and advances ``state``."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != (state.size,) or grads.shape != (state.size,):
        raise NumericError(f"Adam expects {state.size} parameters and gradients, "
                           f"got {params.shape} and {grads.shape}")
    state.step += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads ** 2
    m_hat = state.m / (1 - state.beta1 ** state.step)
    v_hat = state.v / (1 - state.beta2 ** state.step)
    return params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
