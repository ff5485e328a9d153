"""
Fourier analysis of data-encoding circuits.

A layout is the normal form

    U(x) = W_1 D_1(x) W_2 D_2(x) ... W_L D_L(x) W_{L+1}

where each D_l is diagonal: an RZ(scale * x[component]) on some qubits.
Every amplitude <k|U(x)|0> is then a finite sum of c_h * exp(i h.x).
Embedding circuits are brought into this form by conjugating X, Y and
two-qubit rotations onto single-qubit Z slots with Clifford gates.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import unitary_group

from ..core.errors import ConfigError
from . import gates as g
from .embeddings import EmbeddingSpec, FeatureMapKind, stack_units, unit_param_count
from .qsim import UNITARY_TOL, GateOp, embed_operator

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 16
MERGE_DECIMALS = 12
COEFFICIENT_TOL = 1e-12

FrequencyKey = Tuple[float, ...]


@dataclass(frozen=True)
class EncodingSlot:
    """RZ(scale * x[component]) on ``qubit``."""

    qubit: int
    component: int
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class EncodingLayout:
    """Interleavers W_1..W_{L+1} and encoding layers D_1..D_L, left to right.

    ``interleavers[-1]`` acts first on |0...0> and ``interleavers[0]`` last.
    """

    n_qubits: int
    n_inputs: int
    interleavers: Tuple[np.ndarray, ...]
    layers: Tuple[Tuple[EncodingSlot, ...], ...]

    def __post_init__(self) -> None:
        dim = 2 ** self.n_qubits
        mats = tuple(np.asarray(w, dtype=complex) for w in self.interleavers)
        object.__setattr__(self, "interleavers", mats)
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        if len(mats) != len(self.layers) + 1:
            raise ConfigError(f"{len(self.layers)} layers need {len(self.layers) + 1} interleavers, got {len(mats)}")
        for w in mats:
            if w.shape != (dim, dim):
                raise ConfigError(f"interleaver shape {w.shape} does not match {self.n_qubits} qubits")
            if np.max(np.abs(w.conj().T @ w - np.eye(dim))) > 1e3 * UNITARY_TOL:
                raise ConfigError("interleaver is not unitary")
        for layer in self.layers:
            qubits = [slot.qubit for slot in layer]
            if len(set(qubits)) != len(qubits):
                raise ConfigError(f"layer encodes a qubit twice: {qubits}")
            for slot in layer:
                if not 0 <= slot.qubit < self.n_qubits:
                    raise ConfigError(f"slot qubit {slot.qubit} outside register")
                if not 0 <= slot.component < self.n_inputs:
                    raise ConfigError(f"slot component {slot.component} outside input of {self.n_inputs}")

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def layer_patterns(self, layer: int) -> np.ndarray:
        """(2^n, n_inputs) frequency contribution of each basis index in D_layer."""
        dim = 2 ** self.n_qubits
        patterns = np.zeros((dim, self.n_inputs))
        basis = np.arange(dim)
        for slot in self.layers[layer]:
            bit = (basis >> (self.n_qubits - 1 - slot.qubit)) & 1
            patterns[:, slot.component] += np.where(bit == 1, 0.5, -0.5) * slot.scale
        return patterns


@dataclass(frozen=True, eq=False)
class SpectrumEntry:
    frequency: np.ndarray
    coefficient: complex


@dataclass(frozen=True)
class Spectrum:
    n_inputs: int
    amplitude_index: int
    entries: Tuple[SpectrumEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def merged(self, decimals: int = MERGE_DECIMALS) -> "Spectrum":
        """Sum coefficients of equal frequencies and drop vanishing terms."""
        acc: Dict[FrequencyKey, complex] = {}
        for entry in self.entries:
            key = _key(entry.frequency, decimals)
            acc[key] = acc.get(key, 0j) + entry.coefficient
        kept = tuple(
            SpectrumEntry(np.array(key), coeff)
            for key, coeff in sorted(acc.items())
            if abs(coeff) > COEFFICIENT_TOL
        )
        return Spectrum(self.n_inputs, self.amplitude_index, kept)

    @property
    def frequencies(self) -> List[FrequencyKey]:
        return [_key(e.frequency) for e in self.entries]


@dataclass(frozen=True)
class SpectralSummary:
    kind: str
    n_qubits: int
    n_inputs: int
    n_frequencies: int
    max_degree: float
    exact: bool
    unit_frequencies: Tuple[int, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "n_qubits": self.n_qubits,
            "n_inputs": self.n_inputs,
            "n_frequencies": self.n_frequencies,
            "max_degree": self.max_degree,
            "exact": self.exact,
            "unit_frequencies": list(self.unit_frequencies),
        }


def _key(frequency: Union[np.ndarray, Sequence[float]], decimals: int = MERGE_DECIMALS) -> FrequencyKey:
    return tuple(float(v) for v in np.round(np.asarray(frequency, dtype=float), decimals) + 0.0)


def _check_input(layout_inputs: int, x: np.ndarray) -> np.ndarray:
    values = np.asarray(x, dtype=float).reshape(-1)
    if values.shape[0] != layout_inputs:
        raise ConfigError(f"input has {values.shape[0]} components, layout expects {layout_inputs}")
    return values


def enumerate_spectrum(layout: EncodingLayout, amplitude_index: int = 0) -> Spectrum:
    """One entry per index path (k_1, ..., k_L), in lexicographic order."""
    n, L = layout.n_qubits, layout.n_layers
    if n * L > ENUMERATION_LIMIT:
        raise ConfigError(f"enumeration of 2^{n * L} index paths exceeds the limit of 2^{ENUMERATION_LIMIT}")
    dim = 2 ** n
    if not 0 <= amplitude_index < dim:
        raise ConfigError(f"amplitude index {amplitude_index} outside 0..{dim - 1}")
    w = layout.interleavers
    if L == 0:
        return Spectrum(layout.n_inputs, amplitude_index,
                        (SpectrumEntry(np.zeros(layout.n_inputs), complex(w[0][amplitude_index, 0])),))

    lead = np.arange(dim)
    coeff = w[L][lead, 0]
    freq = layout.layer_patterns(L - 1)[lead]
    for layer in range(L - 2, -1, -1):
        total = lead.shape[0]
        new_lead = np.repeat(np.arange(dim), total)
        old = np.tile(np.arange(total), dim)
        coeff = w[layer + 1][new_lead, lead[old]] * coeff[old]
        freq = layout.layer_patterns(layer)[new_lead] + freq[old]
        lead = new_lead
    coeff = w[0][amplitude_index, lead] * coeff
    entries = tuple(SpectrumEntry(freq[i].copy(), complex(coeff[i])) for i in range(coeff.shape[0]))
    return Spectrum(layout.n_inputs, amplitude_index, entries)


def reconstruct_amplitude(spectrum: Spectrum, x: Union[Sequence[float], np.ndarray]) -> complex:
    values = _check_input(spectrum.n_inputs, np.asarray(x))
    if not spectrum.entries:
        return 0j
    freqs = np.stack([e.frequency for e in spectrum.entries])
    coeffs = np.array([e.coefficient for e in spectrum.entries], dtype=complex)
    return complex(np.sum(coeffs * np.exp(1j * (freqs @ values))))


def layout_state(layout: EncodingLayout, x: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """U(x)|0...0> by direct matrix products."""
    values = _check_input(layout.n_inputs, np.asarray(x))
    state = layout.interleavers[-1][:, 0].copy()
    for layer in range(layout.n_layers - 1, -1, -1):
        phases = np.exp(1j * (layout.layer_patterns(layer) @ values))
        state = layout.interleavers[layer] @ (phases * state)
    return state


def direct_amplitude(layout: EncodingLayout, x: Union[Sequence[float], np.ndarray], amplitude_index: int = 0) -> complex:
    return complex(layout_state(layout, x)[amplitude_index])


def propagate_frequencies(layout: EncodingLayout) -> Dict[FrequencyKey, np.ndarray]:
    """Merged frequency -> amplitude-coefficient vector over all basis indices.

    Equal frequencies are merged after every layer, so the work grows with
    the number of distinct frequencies instead of the number of index paths.
    """
    terms: Dict[FrequencyKey, np.ndarray] = {
        _key(np.zeros(layout.n_inputs)): layout.interleavers[-1][:, 0].copy()
    }
    for layer in range(layout.n_layers - 1, -1, -1):
        patterns = layout.layer_patterns(layer)
        unique, inverse = np.unique(np.round(patterns, MERGE_DECIMALS), axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        masks = [inverse == i for i in range(unique.shape[0])]
        merged: Dict[FrequencyKey, np.ndarray] = {}
        for key, vec in terms.items():
            base = np.asarray(key)
            for h, mask in zip(unique, masks):
                part = np.where(mask, vec, 0.0)
                if np.max(np.abs(part)) <= COEFFICIENT_TOL:
                    continue
                new_key = _key(base + h)
                if new_key in merged:
                    merged[new_key] = merged[new_key] + part
                else:
                    merged[new_key] = part
        w = layout.interleavers[layer]
        terms = {k: w @ v for k, v in merged.items() if np.max(np.abs(v)) > COEFFICIENT_TOL}
    return terms


def spectrum_of_layout(layout: EncodingLayout, amplitude_index: Optional[int] = None) -> Spectrum:
    """Merged spectrum for one amplitude; ``None`` keeps every frequency present in any amplitude.

    With ``amplitude_index=None`` the coefficients are the l2 norms over amplitudes.
    """
    terms = propagate_frequencies(layout)
    entries = []
    for key in sorted(terms):
        vec = terms[key]
        coeff = complex(np.linalg.norm(vec)) if amplitude_index is None else complex(vec[amplitude_index])
        if abs(coeff) > COEFFICIENT_TOL:
            entries.append(SpectrumEntry(np.array(key), coeff))
    return Spectrum(layout.n_inputs, -1 if amplitude_index is None else amplitude_index, tuple(entries))


def max_degree(spectrum: Spectrum) -> float:
    if not spectrum.entries:
        return 0.0
    return float(max(np.sum(np.abs(e.frequency)) for e in spectrum.entries))


def minkowski_sum(supports: Iterable[Iterable[FrequencyKey]]) -> List[FrequencyKey]:
    """All sums a + b + ... with one frequency taken from each support."""
    result: Dict[FrequencyKey, None] = {}
    current = [None]
    for support in supports:
        points = [np.asarray(p) for p in support]
        current = [p if c is None else c + p for c in current for p in points]
    for point in current:
        if point is not None:
            result[_key(point)] = None
    return sorted(result)


# Clifford conjugation of rotation gates onto single-qubit Z slots.

class _Slot:
    __slots__ = ("qubit", "component", "scale")

    def __init__(self, qubit: int, component: int, scale: float) -> None:
        self.qubit, self.component, self.scale = qubit, component, scale


_Item = Union[GateOp, _Slot]


def _z_slot(gate: GateOp, q: int, scale: float) -> List[_Item]:
    return [_Slot(q, gate.param_index, scale)]


def _x_slot(gate: GateOp, q: int, scale: float) -> List[_Item]:
    return [g.h(q), _Slot(q, gate.param_index, scale), g.h(q)]


def _y_slot(gate: GateOp, q: int, scale: float) -> List[_Item]:
    return [g.sdg(q), g.h(q), _Slot(q, gate.param_index, scale), g.h(q), g.s(q)]


def _to_z(q: int, axis: str) -> List[GateOp]:
    if axis == "X":
        return [g.h(q)]
    if axis == "Y":
        return [g.sdg(q), g.h(q)]
    return []


def _from_z(q: int, axis: str) -> List[GateOp]:
    if axis == "X":
        return [g.h(q)]
    if axis == "Y":
        return [g.h(q), g.s(q)]
    return []


def _two_body(gate: GateOp, axis: str) -> List[_Item]:
    a, b = gate.targets
    items: List[_Item] = _to_z(a, axis) + _to_z(b, axis)
    items += [g.cx(a, b), _Slot(b, gate.param_index, gate.param_scale), g.cx(a, b)]
    return items + _from_z(a, axis) + _from_z(b, axis)


_SINGLE = {"RZ": _z_slot, "RX": _x_slot, "RY": _y_slot}


def _controlled(gate: GateOp, control: int, target: int, axis: str) -> List[_Item]:
    # C-R_P(a) = R_P(a/2) . K . R_P(-a/2) . K with K anticommuting with P on the target
    flip = g.cz(control, target) if axis == "X" else g.cx(control, target)
    single = _SINGLE["R" + axis]
    half = gate.param_scale / 2.0
    return [flip] + single(gate, target, -half) + [flip] + single(gate, target, half)


def decompose_gate(gate: GateOp) -> List[_Item]:
    """Application-ordered Cliffords and Z slots equal to ``gate``."""
    if not gate.is_parameterized:
        return [gate]
    label = gate.label
    if label in _SINGLE:
        return _SINGLE[label](gate, gate.targets[0], gate.param_scale)
    if label in ("RXX", "RYY", "RZZ"):
        return _two_body(gate, label[1])
    if label in ("CRX", "CRY", "CRZ"):
        return _controlled(gate, gate.targets[0], gate.targets[1], label[2])
    if label == "LY":
        first, second = gate.targets
        return _controlled(gate, second, first, "Y")
    raise ConfigError(f"gate {label} has no Z-diagonal normal form")


def layout_from_gates(gates: Sequence[GateOp], n_qubits: int, n_inputs: int) -> EncodingLayout:
    """Pack a gate list into the normal form.

    A slot joins the open layer when its qubit is free there and no fixed
    gate applied since the layer opened touches that qubit.
    """
    dim = 2 ** n_qubits
    pending = np.eye(dim, dtype=complex)
    touched: set = set()
    interleavers: List[np.ndarray] = []
    layers: List[List[EncodingSlot]] = []
    for gate in gates:
        for item in decompose_gate(gate):
            if isinstance(item, GateOp):
                pending = embed_operator(item.matrix, item.targets, n_qubits) @ pending
                touched.update(item.targets)
                continue
            open_layer = layers[-1] if layers else None
            if (open_layer is not None and item.qubit not in touched
                    and all(s.qubit != item.qubit for s in open_layer)):
                open_layer.append(EncodingSlot(item.qubit, item.component, item.scale))
                continue
            interleavers.append(pending)
            pending = np.eye(dim, dtype=complex)
            touched = set()
            layers.append([EncodingSlot(item.qubit, item.component, item.scale)])
    interleavers.append(pending)
    # application order -> left-to-right product order
    return EncodingLayout(
        n_qubits=n_qubits,
        n_inputs=n_inputs,
        interleavers=tuple(reversed(interleavers)),
        layers=tuple(tuple(layer) for layer in reversed(layers)),
    )


def embedding_layout(kind: Union[str, FeatureMapKind], n_qubits: int) -> EncodingLayout:
    spec = EmbeddingSpec(kind, n_qubits)
    origin = np.zeros(spec.n_features)
    return layout_from_gates(spec.build(origin), n_qubits, spec.n_features)


def spectrum_of_embedding(kind: Union[str, FeatureMapKind], n_qubits: int = 4,
                          amplitude_index: Optional[int] = 0) -> SpectralSummary:
    """Distinct frequency count and maximum degree of an embedding.

    Units are propagated exactly. Stacks use disjoint feature blocks per
    layer, so their support is bounded by the Minkowski sum of the unit
    supports; that bound is what is reported (``exact=False``).
    """
    kind = FeatureMapKind.parse(kind)
    if not kind.is_stacked:
        spectrum = spectrum_of_layout(embedding_layout(kind, n_qubits), amplitude_index)
        n_freq = len(spectrum)
        logger.debug(f"{kind.value} on {n_qubits} qubits: {n_freq} frequencies")
        return SpectralSummary(kind.value, n_qubits, unit_param_count(kind, n_qubits), n_freq,
                               max_degree(spectrum), True, (n_freq,))

    counts: List[int] = []
    degree = 0.0
    for unit in stack_units(kind):
        support = spectrum_of_layout(embedding_layout(unit, n_qubits), None)
        counts.append(len(support))
        degree += max_degree(support)
    return SpectralSummary(kind.value, n_qubits, unit_param_count(kind, n_qubits),
                           int(np.prod(counts)), degree, False, tuple(counts))


def random_layout(n_qubits: int, n_layers: int, rng: np.random.Generator,
                  n_inputs: Optional[int] = None) -> EncodingLayout:
    """Haar-random interleavers with every qubit encoded once per layer."""
    dim = 2 ** n_qubits
    n_inputs = n_qubits * n_layers if n_inputs is None else n_inputs
    interleavers = tuple(unitary_group.rvs(dim, random_state=rng) for _ in range(n_layers + 1))
    layers = []
    for layer in range(n_layers):
        layers.append(tuple(
            EncodingSlot(q, (layer * n_qubits + q) % n_inputs, 1.0) for q in range(n_qubits)
        ))
    return EncodingLayout(n_qubits, n_inputs, interleavers, tuple(layers))


def hrzh_layout() -> EncodingLayout:
    """H RZ(x) H on one qubit; amplitude 0 is cos(x/2)."""
    return EncodingLayout(1, 1, (g.H, g.H), ((EncodingSlot(0, 0, 1.0),),))


def reference_layouts(rng: np.random.Generator) -> Dict[str, EncodingLayout]:
    """Layouts checked by ``fourier-check`` when none is named."""
    return {
        "h_rz_h": hrzh_layout(),
        "identity_rz": EncodingLayout(1, 1, (g.I2, g.I2), ((EncodingSlot(0, 0, 1.0),),)),
        "zz_unit_n2": embedding_layout(FeatureMapKind.ZZ_UNIT, 2),
        "ncx_unit_n2": embedding_layout(FeatureMapKind.NCX_UNIT, 2),
        "random_n2_l3": random_layout(2, 3, rng),
        "random_n3_l2": random_layout(3, 2, rng),
        "random_n3_l3": random_layout(3, 3, rng, n_inputs=4),
    }


@dataclass(frozen=True)
class ReconstructionCheck:
    name: str
    n_qubits: int
    n_layers: int
    n_frequencies: int
    max_error: float


def check_reconstruction(name: str, layout: EncodingLayout, rng: np.random.Generator,
                         n_samples: int = 50) -> Tuple[ReconstructionCheck, Spectrum]:
    """Max |Fourier sum - direct amplitude| over random inputs and every amplitude."""
    dim = 2 ** layout.n_qubits
    if layout.n_qubits * layout.n_layers <= ENUMERATION_LIMIT:
        spectra = [enumerate_spectrum(layout, k).merged() for k in range(dim)]
    else:
        terms = propagate_frequencies(layout)
        spectra = [
            Spectrum(layout.n_inputs, k, tuple(SpectrumEntry(np.array(f), complex(v[k])) for f, v in terms.items()))
            for k in range(dim)
        ]
    worst = 0.0
    for _ in range(n_samples):
        x = rng.uniform(-np.pi, np.pi, layout.n_inputs)
        state = layout_state(layout, x)
        for k, spectrum in enumerate(spectra):
            worst = max(worst, abs(reconstruct_amplitude(spectrum, x) - state[k]))
    result = ReconstructionCheck(name, layout.n_qubits, layout.n_layers, len(spectra[0]), float(worst))
    logger.info(f"fourier check {name}: {result.n_frequencies} frequencies, max error {worst:.3e}")
    return result, spectra[0]
