"""
Noisy density-matrix backend.

Each gate and its trailing noise are compiled into one superoperator;
gradients come from a single Heisenberg-picture backward pass.
"""

import logging
from typing import Optional

import numpy as np

from ..core.config import NoiseConfig
from ..core.errors import ConfigError, NumericError
from ..core.router import Backend, PredictionResult, SimilarityResult
from ..quantum import gates as g
from ..quantum.adjoint import inverse_circuit
from ..quantum.ansatz import QcnnSpec, build_qcnn
from ..quantum.embeddings import EmbeddingSpec
from ..quantum.noise import (
    MAX_DENSITY_QUBITS,
    NoiseModel,
    compile_noisy,
    compiled_expectation_with_gradient,
    readout_flip_observable,
    run_compiled,
)
from ..quantum.qsim import DensityMatrix, embed_operator
from .statevector import _rows

logger = logging.getLogger(__name__)


def noise_from_config(config: Optional[NoiseConfig]) -> NoiseModel:
    """Preset (if named) with explicit fields layered on top; no block means ideal."""
    if config is None:
        return NoiseModel.ideal()
    data = NoiseModel.preset(config.preset).to_dict() if config.preset else {}
    data.update(config.overrides())
    try:
        return NoiseModel.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"incomplete noise model: {exc}") from exc


class DensityBackend(Backend):
    """Noisy simulation; supports the fidelity similarity only."""

    def __init__(self, noise: NoiseModel):
        super().__init__("density", {"noise": noise.to_dict()})
        self.noise = noise

    def _check_size(self, n_qubits: int) -> None:
        if n_qubits > MAX_DENSITY_QUBITS:
            raise NumericError(f"density simulation is limited to {MAX_DENSITY_QUBITS} qubits")

    def _ground(self, n_qubits: int) -> np.ndarray:
        rho = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def embed(self, spec: EmbeddingSpec, features: np.ndarray) -> DensityMatrix:
        self._check_size(spec.n_qubits)
        steps = compile_noisy(spec.build(features), self.noise, spec.n_qubits, with_derivatives=False)
        rho = run_compiled(steps, self._ground(spec.n_qubits), spec.n_qubits)
        return DensityMatrix(spec.n_qubits, (rho + rho.conj().T) / 2)

    def similarity(self, spec: EmbeddingSpec, feat1: np.ndarray, feat2: np.ndarray,
                   kind: str = "fidelity", with_grad: bool = True) -> SimilarityResult:
        """Noisy <0|U(feat1)^dg U(feat2) rho0 ...|0> with readout relaxation and flips."""
        if kind != "fidelity":
            raise ConfigError(f"the density backend supports the fidelity similarity only, got '{kind}'")
        n, n_feat = spec.n_qubits, spec.n_features
        self._check_size(n)
        f1 = _rows(feat1, spec)[0]
        f2 = _rows(feat2, spec)[0]
        gates = spec.build(f2) + [gate.shifted(n_feat) for gate in inverse_circuit(spec.build(f1))]
        steps = compile_noisy(gates, self.noise, n, readout=range(n), with_derivatives=with_grad)
        observable = readout_flip_observable(self.noise.p_meas, n, 0)
        value, grads = compiled_expectation_with_gradient(steps, self._ground(n), observable, n, 2 * n_feat)
        if not np.isfinite(value):
            raise NumericError("noisy fidelity is not finite")
        return SimilarityResult(float(np.clip(value, 0.0, 1.0)), grads[n_feat:], grads[:n_feat])

    def readout_observable(self, qcnn: QcnnSpec) -> np.ndarray:
        p = self.noise.p_meas
        local = (1.0 - p) * g.P0 + p * g.P1
        return embed_operator(local, (qcnn.readout_qubit,), qcnn.n_qubits)

    def predict(self, qcnn: QcnnSpec, theta: np.ndarray, spec: EmbeddingSpec, features: np.ndarray,
                with_grad: bool = True) -> PredictionResult:
        if qcnn.n_qubits != spec.n_qubits:
            raise NumericError(f"ansatz has {qcnn.n_qubits} qubits, embedding has {spec.n_qubits}")
        n = qcnn.n_qubits
        rows = _rows(features, spec)
        steps = compile_noisy(build_qcnn(qcnn, theta), self.noise, n,
                              readout=(qcnn.readout_qubit,), with_derivatives=with_grad)
        observable = self.readout_observable(qcnn)
        probs = np.zeros(rows.shape[0])
        grads = np.zeros((rows.shape[0], qcnn.total_params))
        for b, row in enumerate(rows):
            rho = self.embed(spec, row).entries
            probs[b], grads[b] = compiled_expectation_with_gradient(steps, rho, observable, n, qcnn.total_params)
        return PredictionResult(np.clip(probs, 0.0, 1.0), grads)

    def class_mean_state(self, spec: EmbeddingSpec, features: np.ndarray) -> DensityMatrix:
        rows = _rows(features, spec)
        if rows.shape[0] == 0:
            raise NumericError("class mean of an empty set")
        total = np.zeros((2 ** spec.n_qubits,) * 2, dtype=complex)
        for row in rows:
            total += self.embed(spec, row).entries
        return DensityMatrix(spec.n_qubits, total / rows.shape[0])
