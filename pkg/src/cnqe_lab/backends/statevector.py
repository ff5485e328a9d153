"""
Exact statevector backend with adjoint-mode gradients.
"""

import logging
from typing import Optional

import numpy as np

from ..core.errors import NumericError
from ..core.router import Backend, PredictionResult, SimilarityResult
from ..quantum.adjoint import expectation_with_gradient, overlap_similarity
from ..quantum.ansatz import QcnnSpec, build_qcnn, qcnn_readout_batch, readout_projector
from ..quantum.embeddings import EmbeddingSpec
from ..quantum.qsim import DensityMatrix, StateVector, run_circuit

logger = logging.getLogger(__name__)


def _rows(features: np.ndarray, spec: EmbeddingSpec) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(features, dtype=float))
    if rows.shape[1] != spec.n_features:
        raise NumericError(f"{spec.kind.value} expects {spec.n_features} features, got {rows.shape[1]}")
    return rows


class StatevectorBackend(Backend):
    """Noiseless simulation; similarities and predictions are exact."""

    def __init__(self, config: Optional[dict] = None):
        super().__init__("statevector", config)

    def embed(self, spec: EmbeddingSpec, features: np.ndarray) -> StateVector:
        return run_circuit(spec.build(features), spec.n_qubits)

    def embed_batch(self, spec: EmbeddingSpec, features: np.ndarray) -> np.ndarray:
        """Embedded states as the columns of a (2^n, B) array."""
        rows = _rows(features, spec)
        if rows.shape[0] == 0:
            return np.zeros((2 ** spec.n_qubits, 0), dtype=complex)
        return np.stack([self.embed(spec, row).amplitudes for row in rows], axis=1)

    def similarity(self, spec: EmbeddingSpec, feat1: np.ndarray, feat2: np.ndarray,
                   kind: str = "fidelity", with_grad: bool = True) -> SimilarityResult:
        f1 = _rows(feat1, spec)[0]
        f2 = _rows(feat2, spec)[0]
        value, g1, g2 = overlap_similarity(spec.build(f1), spec.build(f2), spec.n_qubits,
                                           spec.n_features, kind, with_grad)
        return SimilarityResult(value, g1, g2)

    def predict(self, qcnn: QcnnSpec, theta: np.ndarray, spec: EmbeddingSpec, features: np.ndarray,
                with_grad: bool = True) -> PredictionResult:
        if qcnn.n_qubits != spec.n_qubits:
            raise NumericError(f"ansatz has {qcnn.n_qubits} qubits, embedding has {spec.n_qubits}")
        states = self.embed_batch(spec, features)
        if not with_grad:
            return PredictionResult(qcnn_readout_batch(qcnn, theta, states),
                                    np.zeros((states.shape[1], qcnn.total_params)))
        values, grads = expectation_with_gradient(build_qcnn(qcnn, theta), states, readout_projector(qcnn),
                                                  qcnn.n_qubits, qcnn.total_params)
        return PredictionResult(np.clip(values, 0.0, 1.0), grads)

    def class_mean_state(self, spec: EmbeddingSpec, features: np.ndarray) -> DensityMatrix:
        states = self.embed_batch(spec, features)
        if states.shape[1] == 0:
            raise NumericError("class mean of an empty set")
        rho = states @ states.conj().T / states.shape[1]
        rho = (rho + rho.conj().T) / 2
        return DensityMatrix(spec.n_qubits, rho)
