"""Statevector and density-matrix simulation, feature maps and the QCNN ansatz."""

from .qsim import GateOp, StateVector, DensityMatrix, KrausChannel, run_circuit, circuit_unitary
from .embeddings import EmbeddingSpec, FeatureMapKind, embed_state
from .ansatz import QcnnSpec, LayerKind, LayerSpec, build_qcnn, default_layout
from .noise import NoiseModel

__all__ = [
    "GateOp",
    "StateVector",
    "DensityMatrix",
    "KrausChannel",
    "run_circuit",
    "circuit_unitary",
    "EmbeddingSpec",
    "FeatureMapKind",
    "embed_state",
    "QcnnSpec",
    "LayerKind",
    "LayerSpec",
    "build_qcnn",
    "default_layout",
    "NoiseModel",
]
