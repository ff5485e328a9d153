"""
Dense statevector and density-matrix simulation.

Conventions:
    * qubit 0 is the most significant bit of a basis index;
    * a k-qubit gate matrix is written in the basis of its ``targets`` in
      the order given, first target most significant;
    * parameterized gates are exp(-i * angle / 2 * generator) with a
      generator satisfying M^3 = M.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import NumericError

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
HERMITIAN_TOL = 1e-8


def apply_matrix(tensor: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Left-multiply the qubit axes ``targets`` of a (2^n, ...) array by ``matrix``."""
    shape = tensor.shape
    k = len(targets)
    work = tensor.reshape((2,) * n_qubits + shape[1:])
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, work, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(shape)


def embed_operator(matrix: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of a k-qubit operator acting on ``targets``."""
    dim = 2 ** n_qubits
    return apply_matrix(np.eye(dim, dtype=complex), np.asarray(matrix, dtype=complex), targets, n_qubits)


def _check_targets(targets: Sequence[int], n_qubits: int) -> None:
    if len(set(targets)) != len(targets):
        raise NumericError(f"gate targets must be distinct, got {tuple(targets)}")
    for t in targets:
        if t < 0 or t >= n_qubits:
            raise NumericError(f"target qubit {t} out of range for {n_qubits} qubits")


@dataclass(frozen=True, eq=False)
class GateOp:
    """A k-qubit gate with optional parameter tag.

    ``param_index``/``param_scale`` record that ``angle = param_scale *
    features[param_index]``, which is what reverse-mode differentiation
    needs to route gradients back to feature vectors.
    """

    matrix: np.ndarray
    targets: Tuple[int, ...]
    label: str
    generator: Optional[np.ndarray] = None
    angle: float = 0.0
    param_index: Optional[int] = None
    param_scale: float = 1.0

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        k = len(self.targets)
        if k == 0 or matrix.shape != (2 ** k, 2 ** k):
            raise NumericError(f"{self.label}: matrix shape {matrix.shape} does not fit {k} targets")
        if len(set(self.targets)) != k:
            raise NumericError(f"{self.label}: gate targets must be distinct, got {self.targets}")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(2 ** k)))
        if deviation > UNITARY_TOL:
            raise NumericError(f"{self.label}: matrix is not unitary (deviation {deviation:.3e})")

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def is_parameterized(self) -> bool:
        return self.generator is not None and self.param_index is not None

    def dagger(self) -> "GateOp":
        """Inverse gate; exp(-i a M / 2)^dagger is the same family at angle -a."""
        return GateOp(
            matrix=self.matrix.conj().T,
            targets=self.targets,
            label=f"{self.label}^dg",
            generator=self.generator,
            angle=-self.angle,
            param_index=self.param_index,
            param_scale=-self.param_scale,
        )

    def shifted(self, offset: int) -> "GateOp":
        """Same gate with its parameter index moved by ``offset``."""
        if self.param_index is None:
            return self
        return GateOp(self.matrix, self.targets, self.label, self.generator,
                      self.angle, self.param_index + offset, self.param_scale)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape[0] != 2 ** self.n_qubits:
            raise NumericError(
                f"statevector length {amps.shape[0]} does not match 2^{self.n_qubits}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericError(f"statevector is not normalized (norm^2 = {norm:.12f})")

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", rho)
        dim = 2 ** self.n_qubits
        if rho.shape != (dim, dim):
            raise NumericError(f"density matrix shape {rho.shape} does not match 2^{self.n_qubits}")
        if np.max(np.abs(rho - rho.conj().T)) > NORM_TOL:
            raise NumericError("density matrix is not Hermitian")
        trace = np.trace(rho)
        if abs(trace - 1.0) > NORM_TOL:
            raise NumericError(f"density matrix trace is {trace.real:.12f}, expected 1")
        lowest = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
        if lowest < -NORM_TOL:
            raise NumericError(f"density matrix has negative eigenvalue {lowest:.3e}")

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: Tuple[np.ndarray, ...]
    targets: Tuple[int, ...]
    label: str = "channel"

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if not ops:
            raise NumericError(f"{self.label}: channel has no Kraus operators")
        dim = 2 ** len(self.targets)
        for op in ops:
            if op.shape != (dim, dim):
                raise NumericError(f"{self.label}: Kraus operator shape {op.shape} does not fit targets")
        deviation = self.completeness_error()
        if deviation > COMPLETENESS_TOL:
            raise NumericError(f"{self.label}: Kraus completeness violated by {deviation:.3e}")

    def completeness_error(self) -> float:
        total = sum(op.conj().T @ op for op in self.operators)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def superoperator(self) -> np.ndarray:
        """Matrix S with vec(rho') = S vec(rho), vec over (row, column) indices."""
        return sum(np.kron(op, op.conj()) for op in self.operators)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    _check_targets(gate.targets, state.n_qubits)
    amps = apply_matrix(state.amplitudes, gate.matrix, gate.targets, state.n_qubits)
    return StateVector(state.n_qubits, amps)


def run_circuit(gates: Iterable[GateOp], n_qubits: int, initial: Optional[StateVector] = None) -> StateVector:
    """Apply ``gates`` in order to ``initial`` (default |0...0>)."""
    amps = (initial or StateVector.zero(n_qubits)).amplitudes.copy()
    for gate in gates:
        _check_targets(gate.targets, n_qubits)
        amps = apply_matrix(amps, gate.matrix, gate.targets, n_qubits)
    return StateVector(n_qubits, amps)


def circuit_unitary(gates: Iterable[GateOp], n_qubits: int) -> np.ndarray:
    """Product of the embedded gates in application order (last gate leftmost)."""
    unitary = np.eye(2 ** n_qubits, dtype=complex)
    for gate in gates:
        _check_targets(gate.targets, n_qubits)
        unitary = apply_matrix(unitary, gate.matrix, gate.targets, n_qubits)
    return unitary


def to_density(state: StateVector) -> DensityMatrix:
    amps = state.amplitudes
    return DensityMatrix(state.n_qubits, np.outer(amps, amps.conj()))


def conjugate_by(rho: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """K rho K^dagger for a k-qubit K on ``targets``."""
    left = apply_matrix(rho, matrix, targets, n_qubits)
    return apply_matrix(left.conj().T, matrix, targets, n_qubits).conj().T


def apply_channel(rho: DensityMatrix, channel: KrausChannel) -> DensityMatrix:
    _check_targets(channel.targets, rho.n_qubits)
    out = np.zeros_like(rho.entries)
    for op in channel.operators:
        out += conjugate_by(rho.entries, op, channel.targets, rho.n_qubits)
    out = (out + out.conj().T) / 2
    return DensityMatrix(rho.n_qubits, out)


def apply_gate_density(rho: DensityMatrix, gate: GateOp) -> DensityMatrix:
    _check_targets(gate.targets, rho.n_qubits)
    return DensityMatrix(rho.n_qubits, conjugate_by(rho.entries, gate.matrix, gate.targets, rho.n_qubits))


def _symmetrized(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.conj().T)) > tol:
        raise NumericError("matrix is not Hermitian within tolerance")
    return (a + a.conj().T) / 2


def hermitian_eigh(m: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a complex Hermitian matrix.

    Returns eigenvalues in descending order and the matching eigenvectors
    as columns.
    """
    a = _symmetrized(m)
    n = a.shape[0]
    vectors = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r == 0.0:
                    continue
                phase = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q] * np.conj(phase)
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :] * phase
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q] * np.conj(phase)
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning(f"Jacobi eigensolver stopped after {max_sweeps} sweeps without converging")
    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, descending."""
    values, _ = hermitian_eigh(m)
    return values


def expectation(state: Union[StateVector, DensityMatrix], observable: np.ndarray) -> float:
    obs = np.asarray(observable, dtype=complex)
    dim = 2 ** state.n_qubits
    if obs.shape != (dim, dim):
        raise NumericError(f"observable shape {obs.shape} does not match state dimension {dim}")
    obs = _symmetrized(obs)
    if isinstance(state, StateVector):
        return float(np.real(np.vdot(state.amplitudes, obs @ state.amplitudes)))
    return float(np.real(np.trace(obs @ state.entries)))
