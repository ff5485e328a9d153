"""
Ensemble distinguishability: trace distance and the Helstrom measurement.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.errors import NumericError
from ..core.router import Backend
from ..nn.interface import InterfaceModel, interface_features
from ..quantum.embeddings import EmbeddingSpec
from ..quantum.qsim import DensityMatrix, StateVector, hermitian_eigh, hermitian_eigenvalues

logger = logging.getLogger(__name__)

PRIOR_TOL = 1e-12


@dataclass(frozen=True)
class EnsemblePair:
    rho_plus: DensityMatrix
    rho_minus: DensityMatrix
    q_plus: float = 0.5
    q_minus: float = 0.5

    def __post_init__(self) -> None:
        if self.rho_plus.n_qubits != self.rho_minus.n_qubits:
            raise NumericError(f"ensembles live on {self.rho_plus.n_qubits} and {self.rho_minus.n_qubits} qubits")
        if not (0.0 <= self.q_plus <= 1.0 and 0.0 <= self.q_minus <= 1.0):
            raise NumericError("priors must lie in [0, 1]")
        if abs(self.q_plus + self.q_minus - 1.0) > PRIOR_TOL:
            raise NumericError(f"priors sum to {self.q_plus + self.q_minus}, expected 1")

    def weighted_difference(self) -> np.ndarray:
        return self.q_plus * self.rho_plus.entries - self.q_minus * self.rho_minus.entries


def mean_state(states: np.ndarray, n_qubits: int) -> DensityMatrix:
    """Average of |psi><psi| over statevector columns of ``states``."""
    if states.shape[1] == 0:
        raise NumericError("class mean of an empty set")
    rho = states @ states.conj().T / states.shape[1]
    return DensityMatrix(n_qubits, (rho + rho.conj().T) / 2)


def class_mean_state(backend: Backend, spec: EmbeddingSpec, model: InterfaceModel, weights: np.ndarray,
                     images: np.ndarray, labels: np.ndarray, label: int) -> DensityMatrix:
    """Mean embedded state of the images carrying ``label``."""
    members = np.asarray(images)[np.asarray(labels) == label]
    if members.shape[0] == 0:
        raise NumericError(f"no samples with label {label}")
    return backend.class_mean_state(spec, interface_features(model, members, weights))


def _trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.abs(hermitian_eigenvalues(m))))


def trace_distance(pair: EnsemblePair) -> float:
    """Normalized D = 1/2 ||rho_plus - rho_minus||_1, in [0, 1]."""
    return min(1.0, 0.5 * _trace_norm(pair.rho_plus.entries - pair.rho_minus.entries))


def trace_distance_weighted(pair: EnsemblePair) -> float:
    """1/2 ||q_plus rho_plus - q_minus rho_minus||_1."""
    return 0.5 * _trace_norm(pair.weighted_difference())


def states_trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * _trace_norm(np.asarray(rho) - np.asarray(sigma))


def pure_fidelity(psi: StateVector, phi: StateVector) -> float:
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)


def helstrom_measurement(pair: EnsemblePair) -> Tuple[np.ndarray, np.ndarray]:
    """Projectors (Pi_plus, Pi_minus) onto the positive and non-positive eigenspaces."""
    values, vectors = hermitian_eigh(pair.weighted_difference())
    positive = vectors[:, values > 0]
    pi_plus = positive @ positive.conj().T
    return pi_plus, np.eye(pi_plus.shape[0]) - pi_plus


def helstrom_optimal_accuracy(pair: EnsemblePair) -> float:
    """Success probability of the optimal measurement, 1/2 (1 + ||q+ rho+ - q- rho-||_1)."""
    pi_plus, pi_minus = helstrom_measurement(pair)
    success = (pair.q_plus * np.trace(pi_plus @ pair.rho_plus.entries)
               + pair.q_minus * np.trace(pi_minus @ pair.rho_minus.entries))
    return float(np.real(success))


def helstrom_formula_accuracy(pair: EnsemblePair) -> float:
    return 0.5 * (1.0 + _trace_norm(pair.weighted_difference()))


def ensemble_pair(backend: Backend, spec: EmbeddingSpec, model: InterfaceModel, weights: np.ndarray,
                  images: np.ndarray, labels: np.ndarray) -> EnsemblePair:
    """Class means with label 1 as the plus ensemble and empirical priors."""
    labels = np.asarray(labels)
    rho_plus = class_mean_state(backend, spec, model, weights, images, labels, 1)
    rho_minus = class_mean_state(backend, spec, model, weights, images, labels, 0)
    q_plus = float(np.mean(labels == 1))
    return EnsemblePair(rho_plus, rho_minus, q_plus, 1.0 - q_plus)


def feature_ensemble_pair(backend: Backend, spec: EmbeddingSpec, features: np.ndarray,
                          labels: np.ndarray) -> EnsemblePair:
    """As ``ensemble_pair`` for precomputed embedding features."""
    labels = np.asarray(labels)
    plus, minus = features[labels == 1], features[labels == 0]
    if plus.shape[0] == 0 or minus.shape[0] == 0:
        raise NumericError("both classes need at least one sample")
    q_plus = float(np.mean(labels == 1))
    return EnsemblePair(backend.class_mean_state(spec, plus), backend.class_mean_state(spec, minus),
                        q_plus, 1.0 - q_plus)
