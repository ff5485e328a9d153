"""
Embedding circuits: seven unit feature maps and four three-layer stacks.

Builders translate an encoding exp(+i phi P) into the canonical rotation
R_P(-2 phi), so every angle below carries a scale of -2 (or +2 for the
Lorentz-type controlled rotations).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..core.errors import ConfigError, NumericError
from . import gates as g
from .qsim import GateOp, StateVector, run_circuit

logger = logging.getLogger(__name__)


class FeatureMapKind(str, Enum):
    ZZ_UNIT = "zz_unit"
    NCX_UNIT = "ncx_unit"
    NCY_UNIT = "ncy_unit"
    NC10X_UNIT = "nc10x_unit"
    NC10Y_UNIT = "nc10y_unit"
    NCLX_UNIT = "nclx_unit"
    NCLY_UNIT = "ncly_unit"
    ZZ_STACK = "zz"
    NC_STACK = "nc"
    NC10_STACK = "nc10"
    NCL_STACK = "ncl"

    @classmethod
    def parse(cls, name: Union[str, "FeatureMapKind"]) -> "FeatureMapKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        key = _LETTER_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown feature map '{name}' (choose from {choices})") from None

    @property
    def is_stacked(self) -> bool:
        return self in _STACK_UNITS


_LETTER_ALIASES = {
    "a": "zz_unit", "b": "ncx_unit", "c": "ncy_unit", "d": "nc10x_unit",
    "e": "nc10y_unit", "f": "nclx_unit", "g": "ncly_unit",
}

# stack -> (first/last unit, middle unit)
_STACK_UNITS = {
    FeatureMapKind.ZZ_STACK: (FeatureMapKind.ZZ_UNIT, FeatureMapKind.ZZ_UNIT),
    FeatureMapKind.NC_STACK: (FeatureMapKind.NCX_UNIT, FeatureMapKind.NCY_UNIT),
    FeatureMapKind.NC10_STACK: (FeatureMapKind.NC10X_UNIT, FeatureMapKind.NC10Y_UNIT),
    FeatureMapKind.NCL_STACK: (FeatureMapKind.NCLX_UNIT, FeatureMapKind.NCLY_UNIT),
}

STACK_DEPTH = 3


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Real feature vector consumed by an embedding circuit (radians)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(-1))

    def __len__(self) -> int:
        return self.values.shape[0]


Features = Union[ParameterVector, Sequence[float], np.ndarray]


def _as_array(theta: Features) -> np.ndarray:
    if isinstance(theta, ParameterVector):
        return theta.values
    return np.asarray(theta, dtype=float).reshape(-1)


def unit_param_count(kind: Union[str, FeatureMapKind], n: int) -> int:
    kind = FeatureMapKind.parse(kind)
    if n < 2:
        raise NumericError(f"embeddings need at least 2 qubits, got {n}")
    if kind.is_stacked:
        return STACK_DEPTH * unit_param_count(_STACK_UNITS[kind][0], n)
    if kind is FeatureMapKind.ZZ_UNIT:
        return n * (n + 1) // 2
    return 2 * n


def _checked(theta: Features, expected: int, what: str) -> np.ndarray:
    values = _as_array(theta)
    if values.shape[0] != expected:
        raise NumericError(f"{what} expects {expected} parameters, got {values.shape[0]}")
    return values


def build_zz_unit(theta: Features, n: int, offset: int = 0) -> List[GateOp]:
    values = _checked(theta, n * (n + 1) // 2, "ZZ unit")
    ops = [g.h(q) for q in range(n)]
    ops += [g.rz(q, -2.0 * values[q], offset + q, -2.0) for q in range(n)]
    k = n
    for i in range(n):
        for j in range(i + 1, n):
            ops.append(g.rzz(i, j, -2.0 * values[k], offset + k, -2.0))
            k += 1
    return ops


def build_nc_unit(theta: Features, n: int, axis: str = "X", offset: int = 0) -> List[GateOp]:
    values = _checked(theta, 2 * n, f"NC{axis} unit")
    single, double = _axis_rotations(axis)
    ops = [single(q, -2.0 * values[q], offset + q, -2.0) for q in range(n)]
    for i in range(n):
        ops.append(double(i, (i + 1) % n, -2.0 * values[i + n], offset + i + n, -2.0))
    return ops


def build_nc10_unit(theta: Features, n: int, axis: str = "X", offset: int = 0) -> List[GateOp]:
    values = _checked(theta, 2 * n, f"NC10{axis} unit")
    single, _ = _axis_rotations(axis)
    ctrl = g.cx if axis.upper() == "X" else g.cy
    ops = [single(q, -2.0 * values[q], offset + q, -2.0) for q in range(n)]
    ops += [ctrl(i, (i + 1) % n) for i in range(n)]
    ops += [single(q, -2.0 * values[q + n], offset + q + n, -2.0) for q in range(n)]
    return ops


def build_ncl_unit(theta: Features, n: int, axis: str = "X", offset: int = 0) -> List[GateOp]:
    values = _checked(theta, 2 * n, f"NCL{axis} unit")
    single, _ = _axis_rotations(axis)
    ops = [single(q, -2.0 * values[q], offset + q, -2.0) for q in range(n)]
    for i in range(n):
        nxt = (i + 1) % n
        if axis.upper() == "X":
            ops.append(g.cry(nxt, i, 2.0 * values[i + n], offset + i + n, 2.0))
        else:
            ops.append(g.lorentz_y(i, nxt, -2.0 * values[i + n], offset + i + n, -2.0))
    return ops


def _axis_rotations(axis: str):
    axis = axis.upper()
    if axis == "X":
        return g.rx, g.rxx
    if axis == "Y":
        return g.ry, g.ryy
    raise ConfigError(f"axis must be X or Y, got {axis!r}")


_UNIT_BUILDERS: Dict[FeatureMapKind, Callable[..., List[GateOp]]] = {
    FeatureMapKind.ZZ_UNIT: lambda t, n, o: build_zz_unit(t, n, o),
    FeatureMapKind.NCX_UNIT: lambda t, n, o: build_nc_unit(t, n, "X", o),
    FeatureMapKind.NCY_UNIT: lambda t, n, o: build_nc_unit(t, n, "Y", o),
    FeatureMapKind.NC10X_UNIT: lambda t, n, o: build_nc10_unit(t, n, "X", o),
    FeatureMapKind.NC10Y_UNIT: lambda t, n, o: build_nc10_unit(t, n, "Y", o),
    FeatureMapKind.NCLX_UNIT: lambda t, n, o: build_ncl_unit(t, n, "X", o),
    FeatureMapKind.NCLY_UNIT: lambda t, n, o: build_ncl_unit(t, n, "Y", o),
}


def build_stacked(kind: Union[str, FeatureMapKind], theta: Features, n: int) -> List[GateOp]:
    """Three-layer stack; theta(1) is applied first, the middle layer uses the Y-axis unit."""
    kind = FeatureMapKind.parse(kind)
    if not kind.is_stacked:
        raise ConfigError(f"{kind.value} is not a stacked feature map")
    outer, middle = _STACK_UNITS[kind]
    unit = unit_param_count(outer, n)
    values = _checked(theta, STACK_DEPTH * unit, f"{kind.value} stack")
    ops: List[GateOp] = []
    for layer, unit_kind in enumerate((outer, middle, outer)):
        chunk = values[layer * unit:(layer + 1) * unit]
        ops += _UNIT_BUILDERS[unit_kind](chunk, n, layer * unit)
    return ops


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: FeatureMapKind
    n_qubits: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FeatureMapKind.parse(self.kind))
        if self.n_qubits < 2:
            raise NumericError(f"embeddings need at least 2 qubits, got {self.n_qubits}")

    @property
    def n_features(self) -> int:
        return unit_param_count(self.kind, self.n_qubits)

    @property
    def unit_features(self) -> int:
        if self.kind.is_stacked:
            return self.n_features // STACK_DEPTH
        return self.n_features

    def build(self, features: Features) -> List[GateOp]:
        if self.kind.is_stacked:
            return build_stacked(self.kind, features, self.n_qubits)
        return _UNIT_BUILDERS[self.kind](features, self.n_qubits, 0)


def embed_state(spec: EmbeddingSpec, features: Features) -> StateVector:
    """U(features)|0...0>."""
    return run_circuit(spec.build(features), spec.n_qubits)


def stack_units(kind: Union[str, FeatureMapKind]) -> Tuple[FeatureMapKind, ...]:
    """Unit feature maps of a stack in application order."""
    kind = FeatureMapKind.parse(kind)
    if not kind.is_stacked:
        return (kind,)
    outer, middle = _STACK_UNITS[kind]
    return (outer, middle, outer)
