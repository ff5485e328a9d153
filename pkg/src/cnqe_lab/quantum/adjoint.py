"""
Reverse-mode differentiation through gate lists.

Each parameterized gate is exp(-i a M / 2) with a = scale * x[index], so
dG/dx = -(i/2) * scale * M G. One backward sweep that un-applies gates
from both ends gives every parameter's derivative.
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigError, NumericError
from .qsim import GateOp, apply_matrix

SIMILARITY_KINDS = ("fidelity", "hs", "hs_abs")


def _forward(gates: Sequence[GateOp], columns: np.ndarray, n_qubits: int) -> np.ndarray:
    out = columns
    for gate in gates:
        out = apply_matrix(out, gate.matrix, gate.targets, n_qubits)
    return out


def _overlap_derivatives(gates: Sequence[GateOp], psi: np.ndarray, lam: np.ndarray,
                         n_qubits: int, n_params: int) -> np.ndarray:
    """d<lam|U|in>/dx where psi = U|in> and lam is held at the output end."""
    dz = np.zeros(n_params, dtype=complex)
    for gate in reversed(gates):
        if gate.is_parameterized:
            mu = apply_matrix(psi, gate.generator, gate.targets, n_qubits)
            dz[gate.param_index] += gate.param_scale * (-0.5j) * np.vdot(lam, mu)
        dagger = gate.matrix.conj().T
        psi = apply_matrix(psi, dagger, gate.targets, n_qubits)
        lam = apply_matrix(lam, dagger, gate.targets, n_qubits)
    return dz


def overlap_similarity(gates1: Sequence[GateOp], gates2: Sequence[GateOp], n_qubits: int,
                       n_features: int, kind: str = "fidelity",
                       with_grad: bool = True) -> Tuple[float, np.ndarray, np.ndarray]:
    """Similarity of U1 = gates1 and U2 = gates2 with gradients for both feature vectors.

    ``fidelity``: |<0|U1^dg U2|0>|^2; ``hs``: Re tr(U1^dg U2) / 2^n;
    ``hs_abs``: |tr(U1^dg U2)| / 2^n.
    """
    if kind not in SIMILARITY_KINDS:
        raise ConfigError(f"unknown similarity kind '{kind}'")
    dim = 2 ** n_qubits
    if kind == "fidelity":
        start = np.zeros(dim, dtype=complex)
        start[0] = 1.0
        norm = 1.0
    else:
        start = np.eye(dim, dtype=complex)
        norm = float(dim)
    phi1 = _forward(gates1, start, n_qubits)
    phi2 = _forward(gates2, start, n_qubits)
    z = np.vdot(phi1, phi2)

    if kind == "fidelity":
        value = float(abs(z) ** 2)
    elif kind == "hs":
        value = float(z.real / norm)
    else:
        value = float(abs(z) / norm)
    if not np.isfinite(value):
        raise NumericError(f"{kind} similarity is not finite")
    if not with_grad:
        return value, np.zeros(n_features), np.zeros(n_features)

    dz2 = _overlap_derivatives(gates2, phi2, phi1, n_qubits, n_features)
    dz1 = np.conj(_overlap_derivatives(gates1, phi1, phi2, n_qubits, n_features))

    def chain(dz: np.ndarray) -> np.ndarray:
        if kind == "fidelity":
            return 2.0 * np.real(np.conj(z) * dz)
        if kind == "hs":
            return np.real(dz) / norm
        magnitude = abs(z)
        if magnitude == 0.0:
            return np.zeros(dz.shape[0])
        return np.real(np.conj(z) * dz) / (magnitude * norm)

    return value, chain(dz1), chain(dz2)


def expectation_with_gradient(gates: Sequence[GateOp], states: np.ndarray, observable: np.ndarray,
                              n_qubits: int, n_params: int) -> Tuple[np.ndarray, np.ndarray]:
    """<psi_b| V^dg O V |psi_b> for a batch of input columns, with d/dtheta.

    ``states`` has shape (2^n, B); returns values (B,) and gradients (B, n_params).
    """
    phi = _forward(gates, states, n_qubits)
    lam = observable @ phi
    values = np.real(np.sum(np.conj(phi) * lam, axis=0))
    grads = np.zeros((states.shape[1], n_params))
    for gate in reversed(gates):
        if gate.is_parameterized:
            mu = apply_matrix(phi, gate.generator, gate.targets, n_qubits)
            contrib = 2.0 * np.real(np.sum(np.conj(lam) * (-0.5j) * mu, axis=0))
            grads[:, gate.param_index] += gate.param_scale * contrib
        dagger = gate.matrix.conj().T
        phi = apply_matrix(phi, dagger, gate.targets, n_qubits)
        lam = apply_matrix(lam, dagger, gate.targets, n_qubits)
    return values, grads


def inverse_circuit(gates: Sequence[GateOp]) -> List[GateOp]:
    """U^dg as a gate list: reversed order, each gate daggered."""
    return [gate.dagger() for gate in reversed(gates)]
