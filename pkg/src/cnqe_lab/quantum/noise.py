"""
Hardware-style noise: depolarizing and thermal-relaxation channels after
every gate, readout relaxation and symmetric readout flips.

Two execution paths share the same channels:

* ``noisy_execute`` applies Kraus channels one by one to a DensityMatrix;
* ``compile_noisy`` folds each gate and its trailing noise into a single
  superoperator on the gate's qubits, which the density backend runs
  forward and then backward (Heisenberg picture) to get exact gradients.
"""

import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache, reduce
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigError, NumericError
from . import gates as g
from .qsim import (
    DensityMatrix,
    GateOp,
    KrausChannel,
    StateVector,
    apply_channel,
    apply_gate_density,
    to_density,
)

logger = logging.getLogger(__name__)

MAX_DENSITY_QUBITS = 8
PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"

_JSON_FIELDS = {
    "t1_us": "t1",
    "t2_us": "t2",
    "p1q": "p1q",
    "p2q": "p2q",
    "p_meas": "p_meas",
    "dur_1q_us": "dur_1q",
    "dur_2q_us": "dur_2q",
    "dur_meas_us": "dur_meas",
}


@dataclass(frozen=True)
class NoiseModel:
    """Average device noise; times in microseconds."""

    t1: float
    t2: float
    p1q: float
    p2q: float
    p_meas: float
    dur_1q: float = 0.035
    dur_2q: float = 0.30
    dur_meas: float = 1.0

    def __post_init__(self) -> None:
        if self.t1 <= 0 or self.t2 <= 0:
            raise ConfigError("t1 and t2 must be positive")
        if self.t2 > 2.0 * self.t1:
            raise ConfigError(f"t2 ({self.t2}) must not exceed 2*t1 ({2.0 * self.t1})")
        for name in ("p1q", "p2q", "p_meas"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        for name in ("dur_1q", "dur_2q", "dur_meas"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        """No decoherence, no gate or readout errors."""
        return cls(t1=math.inf, t2=math.inf, p1q=0.0, p2q=0.0, p_meas=0.0)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NoiseModel":
        unknown = set(data) - set(_JSON_FIELDS)
        if unknown:
            raise ConfigError(f"unknown noise fields: {sorted(unknown)}")
        return cls(**{_JSON_FIELDS[key]: float(value) for key, value in data.items()})

    def to_dict(self) -> Dict[str, float]:
        values = asdict(self)
        return {key: values[attr] for key, attr in _JSON_FIELDS.items()}

    @classmethod
    def preset(cls, name: str) -> "NoiseModel":
        path = PRESET_DIR / f"{name}.json"
        if not path.exists():
            available = sorted(p.stem for p in PRESET_DIR.glob("*.json"))
            raise ConfigError(f"unknown noise preset '{name}' (available: {available})")
        with open(path, "r") as f:
            return cls.from_dict(json.load(f))

    def gate_error(self, arity: int) -> float:
        return self.p1q if arity == 1 else self.p2q

    def gate_duration(self, arity: int) -> float:
        return self.dur_1q if arity == 1 else self.dur_2q


def _pauli_strings(k: int) -> List[np.ndarray]:
    ops = []
    for labels in itertools.product("IXYZ", repeat=k):
        op = np.array([[1.0 + 0j]])
        for label in labels:
            op = np.kron(op, g.PAULIS[label])
        ops.append(op)
    return ops


def depolarizing(p: float, k_qubits: int = 1, targets: Optional[Sequence[int]] = None) -> KrausChannel:
    """(1-p) rho + p I / 2^k as 4^k Pauli Kraus terms."""
    if not 0.0 <= p <= 1.0:
        raise NumericError(f"depolarizing probability must lie in [0, 1], got {p}")
    targets = tuple(range(k_qubits)) if targets is None else tuple(targets)
    paulis = _pauli_strings(k_qubits)
    weight = p / 4 ** k_qubits
    ops = [math.sqrt(1.0 - p + weight) * paulis[0]]
    ops += [math.sqrt(weight) * op for op in paulis[1:]]
    return KrausChannel(tuple(ops), targets, f"depolarizing({p})")


def thermal_relaxation(t1: float, t2: float, duration: float, target: int = 0) -> KrausChannel:
    """Amplitude damping over ``duration`` followed by the extra pure dephasing
    that brings off-diagonal decay to exp(-duration / t2)."""
    if t1 <= 0 or t2 <= 0 or t2 > 2.0 * t1:
        raise NumericError(f"invalid relaxation times t1={t1}, t2={t2}")
    if duration < 0:
        raise NumericError(f"duration must be non-negative, got {duration}")
    gamma = 1.0 - math.exp(-duration / t1)
    rate = max(1.0 / t2 - 1.0 / (2.0 * t1), 0.0)
    lam = 0.0 if rate == 0.0 or duration == 0.0 else 1.0 - math.exp(-duration * rate)
    damping = [
        np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex),
        np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex),
    ]
    dephasing = [math.sqrt(1.0 - lam) * g.I2, math.sqrt(lam) * g.P0, math.sqrt(lam) * g.P1]
    ops = [dp @ ad for dp in dephasing for ad in damping]
    ops = [op for op in ops if np.any(op != 0)]
    return KrausChannel(tuple(ops), (target,), f"thermal({duration})")


def measurement_flip(p_meas: float, probabilities: np.ndarray) -> np.ndarray:
    """Independent symmetric readout flips on every qubit of a distribution.

    For a single qubit this is p' = (1 - p_meas) p + p_meas (1 - p).
    """
    if not 0.0 <= p_meas <= 1.0:
        raise NumericError(f"p_meas must lie in [0, 1], got {p_meas}")
    probs = np.asarray(probabilities, dtype=float)
    if abs(probs.sum() - 1.0) > 1e-9:
        raise NumericError("probabilities must sum to 1")
    n_qubits = int(round(math.log2(probs.shape[0])))
    if 2 ** n_qubits != probs.shape[0]:
        raise NumericError(f"distribution length {probs.shape[0]} is not a power of two")
    confusion = np.array([[1.0 - p_meas, p_meas], [p_meas, 1.0 - p_meas]])
    work = probs.reshape((2,) * n_qubits)
    for q in range(n_qubits):
        work = np.moveaxis(np.tensordot(confusion, work, axes=([1], [q])), 0, q)
    return work.reshape(-1)


def gate_noise_channels(noise: NoiseModel, gate: GateOp) -> List[KrausChannel]:
    arity = gate.arity
    channels = [depolarizing(noise.gate_error(arity), arity, gate.targets)]
    for q in gate.targets:
        channels.append(thermal_relaxation(noise.t1, noise.t2, noise.gate_duration(arity), q))
    return channels


def noisy_execute(gates: Sequence[GateOp], noise: NoiseModel, n_qubits: int,
                  initial: Optional[DensityMatrix] = None) -> DensityMatrix:
    """Density-matrix simulation with noise inserted after every gate."""
    if n_qubits > MAX_DENSITY_QUBITS:
        raise NumericError(f"density simulation is limited to {MAX_DENSITY_QUBITS} qubits")
    rho = initial or to_density(StateVector.zero(n_qubits))
    for gate in gates:
        rho = apply_gate_density(rho, gate)
        for channel in gate_noise_channels(noise, gate):
            rho = apply_channel(rho, channel)
    return rho


def readout_probabilities(rho: DensityMatrix, noise: NoiseModel) -> np.ndarray:
    """Outcome distribution after readout relaxation and readout flips."""
    for q in range(rho.n_qubits):
        rho = apply_channel(rho, thermal_relaxation(noise.t1, noise.t2, noise.dur_meas, q))
    probs = rho.probabilities()
    return measurement_flip(noise.p_meas, probs / probs.sum())


# -- compiled superoperator path ------------------------------------------------

def apply_superop(rho: np.ndarray, superop: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Apply a 4^k x 4^k superoperator to the ``targets`` of a 2^n x 2^n matrix."""
    k = len(targets)
    axes = list(targets) + [n_qubits + t for t in targets]
    work = rho.reshape((2,) * (2 * n_qubits))
    op = superop.reshape((2,) * (4 * k))
    out = np.tensordot(op, work, axes=(list(range(2 * k, 4 * k)), axes))
    out = np.moveaxis(out, list(range(2 * k)), axes)
    return out.reshape(rho.shape)


def _gate_superop(matrix: np.ndarray) -> np.ndarray:
    return np.kron(matrix, matrix.conj())


def _commutator_superop(generator: np.ndarray) -> np.ndarray:
    eye = np.eye(generator.shape[0])
    return np.kron(generator, eye) - np.kron(eye, generator.T)


@lru_cache(maxsize=64)
def _noise_superop(noise: NoiseModel, arity: int) -> np.ndarray:
    depol = depolarizing(noise.gate_error(arity), arity).superoperator()
    single = thermal_relaxation(noise.t1, noise.t2, noise.gate_duration(arity)).operators
    products = [reduce(np.kron, combo) for combo in itertools.product(single, repeat=arity)]
    thermal = KrausChannel(tuple(products), tuple(range(arity)), "thermal").superoperator()
    return thermal @ depol


def _bit(index: int, pos: int, width: int) -> int:
    return (index >> (width - 1 - pos)) & 1


@lru_cache(maxsize=8)
def _readout_superop(noise: NoiseModel) -> np.ndarray:
    return thermal_relaxation(noise.t1, noise.t2, noise.dur_meas).superoperator()


@dataclass(frozen=True, eq=False)
class CompiledStep:
    """One gate plus its trailing noise as a superoperator."""

    targets: Tuple[int, ...]
    superop: np.ndarray
    derivative: Optional[np.ndarray] = None
    param_index: Optional[int] = None
    param_scale: float = 1.0


def compile_noisy(gates: Sequence[GateOp], noise: NoiseModel, n_qubits: int,
                  readout: Sequence[int] = (), with_derivatives: bool = True) -> List[CompiledStep]:
    """Compile gates (and readout relaxation on ``readout`` qubits) to superoperators."""
    if n_qubits > MAX_DENSITY_QUBITS:
        raise NumericError(f"density simulation is limited to {MAX_DENSITY_QUBITS} qubits")
    steps = []
    for gate in gates:
        noise_op = _noise_superop(noise, gate.arity)
        gate_op = _gate_superop(gate.matrix)
        derivative = None
        if with_derivatives and gate.is_parameterized:
            derivative = noise_op @ (-0.5j * _commutator_superop(gate.generator)) @ gate_op
        steps.append(CompiledStep(gate.targets, noise_op @ gate_op, derivative,
                                  gate.param_index if derivative is not None else None, gate.param_scale))
    for q in readout:
        steps.append(CompiledStep((q,), _readout_superop(noise)))
    return steps


def run_compiled(steps: Sequence[CompiledStep], rho: np.ndarray, n_qubits: int) -> np.ndarray:
    for step in steps:
        rho = apply_superop(rho, step.superop, step.targets, n_qubits)
    return rho


def compiled_expectation_with_gradient(steps: Sequence[CompiledStep], rho0: np.ndarray,
                                       observable: np.ndarray, n_qubits: int,
                                       n_params: int) -> Tuple[float, np.ndarray]:
    """tr(O Phi(rho0)) and its derivative for every tagged parameter."""
    history = [rho0]
    rho = rho0
    for step in steps:
        rho = apply_superop(rho, step.superop, step.targets, n_qubits)
        history.append(rho)
    value = float(np.real(np.vdot(observable, rho)))
    grads = np.zeros(n_params)
    heis = np.asarray(observable, dtype=complex)
    for index in range(len(steps) - 1, -1, -1):
        step = steps[index]
        if step.derivative is not None:
            d_rho = apply_superop(history[index], step.derivative, step.targets, n_qubits)
            grads[step.param_index] += step.param_scale * float(np.real(np.vdot(heis, d_rho)))
        heis = apply_superop(heis, step.superop.conj().T, step.targets, n_qubits)
    return value, grads


def readout_flip_observable(p_meas: float, n_qubits: int, outcome: int = 0) -> np.ndarray:
    """Diagonal observable whose expectation is the flipped probability of ``outcome``."""
    diag = np.ones(2 ** n_qubits)
    for index in range(2 ** n_qubits):
        for q in range(n_qubits):
            same = _bit(index, q, n_qubits) == _bit(outcome, q, n_qubits)
            diag[index] *= (1.0 - p_meas) if same else p_meas
    return np.diag(diag).astype(complex)
