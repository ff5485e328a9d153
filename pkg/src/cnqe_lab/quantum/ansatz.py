"""
QCNN classifier circuit V(theta) and its single-qubit readout.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..core.errors import ConfigError, NumericError
from . import gates as g
from .qsim import (
    DensityMatrix,
    GateOp,
    StateVector,
    conjugate_by,
    embed_operator,
    apply_matrix,
)

logger = logging.getLogger(__name__)


class LayerKind(str, Enum):
    CONV = "conv"
    POOL = "pool"
    ROTATION = "rotation"
    READOUT = "readout"


_UNIT_PARAMS = {LayerKind.CONV: 2, LayerKind.POOL: 2, LayerKind.ROTATION: 1, LayerKind.READOUT: 3}


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    pairs: Tuple[Tuple[int, ...], ...]
    shared: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LayerKind(self.kind))
        object.__setattr__(self, "pairs", tuple(tuple(int(q) for q in p) for p in self.pairs))
        width = 1 if self.kind in (LayerKind.ROTATION, LayerKind.READOUT) else 2
        for pair in self.pairs:
            if len(pair) != width:
                raise ConfigError(f"{self.kind.value} layer expects {width}-qubit groups, got {pair}")

    @property
    def unit_params(self) -> int:
        return _UNIT_PARAMS[self.kind]

    @property
    def n_params(self) -> int:
        return self.unit_params if self.shared else self.unit_params * len(self.pairs)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "pairs": [list(p) for p in self.pairs], "shared": self.shared}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LayerSpec":
        return cls(LayerKind(data["kind"]), tuple(tuple(p) for p in data["pairs"]), bool(data.get("shared", True)))


@dataclass(frozen=True)
class QcnnSpec:
    n_qubits: int
    layout: Tuple[LayerSpec, ...]
    readout_qubit: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "layout", tuple(self.layout))
        if not 0 <= self.readout_qubit < self.n_qubits:
            raise ConfigError(f"readout qubit {self.readout_qubit} outside register of {self.n_qubits}")
        for layer in self.layout:
            for group in layer.pairs:
                for q in group:
                    if not 0 <= q < self.n_qubits:
                        raise ConfigError(f"layer qubit {q} outside register of {self.n_qubits}")

    @property
    def total_params(self) -> int:
        return sum(layer.n_params for layer in self.layout)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_qubits": self.n_qubits,
            "readout_qubit": self.readout_qubit,
            "layout": [layer.to_dict() for layer in self.layout],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QcnnSpec":
        layout = tuple(LayerSpec.from_dict(layer) for layer in data["layout"])
        return cls(int(data["n_qubits"]), layout, int(data["readout_qubit"]))


def default_layout(n_qubits: int = 4) -> QcnnSpec:
    """Two conv/pool levels on four qubits (15 parameters); deeper pyramids otherwise."""
    if n_qubits < 2:
        raise ConfigError("a QCNN needs at least 2 qubits")
    if n_qubits == 4:
        layout = (
            LayerSpec(LayerKind.CONV, ((0, 1), (2, 3), (1, 2), (3, 0))),
            LayerSpec(LayerKind.POOL, ((0, 1), (2, 3))),
            LayerSpec(LayerKind.ROTATION, ((0,), (1,), (2,), (3,)), shared=False),
            LayerSpec(LayerKind.CONV, ((1, 3),)),
            LayerSpec(LayerKind.POOL, ((1, 3),)),
            LayerSpec(LayerKind.READOUT, ((3,),)),
        )
        return QcnnSpec(4, layout, 3)

    active = list(range(n_qubits))
    layout: List[LayerSpec] = []
    while len(active) > 1:
        conv = [(active[i], active[i + 1]) for i in range(0, len(active) - 1, 2)]
        conv += [(active[i], active[i + 1]) for i in range(1, len(active) - 1, 2)]
        if len(active) > 2:
            conv.append((active[-1], active[0]))
        pool = [(active[i], active[i + 1]) for i in range(0, len(active) - 1, 2)]
        survivors = [t for _, t in pool]
        if len(active) % 2:
            survivors.append(active[-1])
        layout.append(LayerSpec(LayerKind.CONV, tuple(conv)))
        layout.append(LayerSpec(LayerKind.POOL, tuple(pool)))
        active = survivors
    layout.append(LayerSpec(LayerKind.READOUT, ((active[0],),)))
    return QcnnSpec(n_qubits, tuple(layout), active[0])


def _conv_unit(a: int, b: int, theta: np.ndarray, base: int) -> List[GateOp]:
    return [
        g.ry(a, theta[base], base),
        g.ry(b, theta[base + 1], base + 1),
        g.cx(a, b),
    ]


def _pool_unit(control: int, target: int, theta: np.ndarray, base: int) -> List[GateOp]:
    return [
        g.crz(control, target, theta[base], base),
        g.x(control),
        g.crx(control, target, theta[base + 1], base + 1),
        g.x(control),
    ]


def build_qcnn(spec: QcnnSpec, theta: Union[Sequence[float], np.ndarray]) -> List[GateOp]:
    values = np.asarray(theta, dtype=float).reshape(-1)
    if values.shape[0] != spec.total_params:
        raise NumericError(f"QCNN expects {spec.total_params} parameters, got {values.shape[0]}")
    ops: List[GateOp] = []
    offset = 0
    for layer in spec.layout:
        for index, group in enumerate(layer.pairs):
            base = offset if layer.shared else offset + index * layer.unit_params
            if layer.kind is LayerKind.CONV:
                ops += _conv_unit(group[0], group[1], values, base)
            elif layer.kind is LayerKind.POOL:
                ops += _pool_unit(group[0], group[1], values, base)
            elif layer.kind is LayerKind.ROTATION:
                ops.append(g.ry(group[0], values[base], base))
            else:
                q = group[0]
                ops += [g.rz(q, values[base], base), g.ry(q, values[base + 1], base + 1),
                        g.rz(q, values[base + 2], base + 2)]
        offset += layer.n_params
    return ops


def readout_projector(spec: QcnnSpec) -> np.ndarray:
    """|0><0| on the readout qubit; its expectation is p = (1 + <Z>) / 2."""
    return embed_operator(g.P0, (spec.readout_qubit,), spec.n_qubits)


def qcnn_readout_batch(spec: QcnnSpec, theta: Union[Sequence[float], np.ndarray], states: np.ndarray) -> np.ndarray:
    """Readout probabilities for the columns of a (2^n, B) statevector array, clipped to [0, 1]."""
    out = states
    for gate in build_qcnn(spec, theta):
        out = apply_matrix(out, gate.matrix, gate.targets, spec.n_qubits)
    values = np.real(np.sum(np.conj(out) * (readout_projector(spec) @ out), axis=0))
    return np.clip(values, 0.0, 1.0)


def qcnn_predict(spec: QcnnSpec, theta: Union[Sequence[float], np.ndarray],
                 embedded: Union[StateVector, DensityMatrix]) -> float:
    if embedded.n_qubits != spec.n_qubits:
        raise NumericError(f"embedded state has {embedded.n_qubits} qubits, ansatz expects {spec.n_qubits}")
    if isinstance(embedded, StateVector):
        return float(qcnn_readout_batch(spec, theta, embedded.amplitudes[:, None])[0])
    ops = build_qcnn(spec, theta)
    projector = readout_projector(spec)
    rho = embedded.entries
    for gate in ops:
        rho = conjugate_by(rho, gate.matrix, gate.targets, spec.n_qubits)
    return min(1.0, max(0.0, float(np.real(np.trace(projector @ rho)))))
