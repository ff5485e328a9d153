"""
Simulation backend registry for cnqe-lab.
Routes embedding, similarity and QCNN prediction requests to a simulator.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimilarityResult:
    """Similarity of two embedded feature vectors with d/dfeat1 and d/dfeat2."""

    value: float
    grad1: np.ndarray
    grad2: np.ndarray


@dataclass(frozen=True, eq=False)
class PredictionResult:
    """Readout probabilities p (B,) and dp/dtheta (B, P) for a batch."""

    probabilities: np.ndarray
    gradients: np.ndarray


class Backend(ABC):
    """Abstract base class for simulation backends."""

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None):
        self.name = name
        self.config = config or {}
        self.enabled = True

    @abstractmethod
    def similarity(self, spec, feat1: np.ndarray, feat2: np.ndarray, kind: str = "fidelity",
                   with_grad: bool = True) -> SimilarityResult:
        """Similarity between U(feat1) and U(feat2)."""

    @abstractmethod
    def predict(self, qcnn, theta: np.ndarray, spec, features: np.ndarray,
                with_grad: bool = True) -> PredictionResult:
        """QCNN readout probability for each row of ``features``."""

    @abstractmethod
    def class_mean_state(self, spec, features: np.ndarray):
        """Mean embedded density matrix over the rows of ``features``."""

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "enabled": self.enabled, **self.config}


class BackendRouter:
    """Holds the registered simulation backends."""

    def __init__(self):
        self._backends: Dict[str, Backend] = {}

    def register_backend(self, backend: Backend) -> None:
        self._backends[backend.name] = backend
        logger.debug(f"Registered backend: {backend.name}")

    def get_backend(self, name: str) -> Optional[Backend]:
        return self._backends.get(name)

    def list_backends(self) -> List[str]:
        return list(self._backends.keys())

    def resolve(self, name: str) -> Backend:
        """Backend by name; unknown or disabled names are configuration errors."""
        backend = self.get_backend(name)
        if backend is None:
            raise ConfigError(f"unknown backend '{name}' (registered: {self.list_backends()})")
        if not backend.enabled:
            raise ConfigError(f"backend '{name}' is disabled")
        return backend
