import numpy as np
import pytest

from cnqe_lab.core.errors import ConfigError, NumericError
from cnqe_lab.quantum.ansatz import (
    LayerKind,
    LayerSpec,
    QcnnSpec,
    build_qcnn,
    default_layout,
    qcnn_predict,
)
from cnqe_lab.quantum.qsim import StateVector, circuit_unitary, to_density


@pytest.mark.parametrize("n", [4, 6, 8])
def test_default_layout_has_fifteen_parameters(n):
    spec = default_layout(n)
    assert spec.total_params == 15
    assert len(build_qcnn(spec, np.zeros(15))) > 0


def test_four_qubit_layout_reads_last_qubit():
    spec = default_layout(4)
    assert spec.readout_qubit == 3
    assert [layer.kind for layer in spec.layout] == [
        LayerKind.CONV, LayerKind.POOL, LayerKind.ROTATION, LayerKind.CONV, LayerKind.POOL, LayerKind.READOUT,
    ]


def test_qcnn_is_unitary(rng):
    spec = default_layout(4)
    u = circuit_unitary(build_qcnn(spec, rng.uniform(-np.pi, np.pi, 15)), 4)
    assert np.max(np.abs(u.conj().T @ u - np.eye(16))) < 1e-10


def test_zero_parameters_leave_basis_states_classical():
    # at theta = 0 only the CX ladder acts, so basis states stay basis states
    spec = default_layout(4)
    theta = np.zeros(15)
    assert qcnn_predict(spec, theta, StateVector.basis(4, 0)) == pytest.approx(1.0)
    assert qcnn_predict(spec, theta, StateVector.basis(4, 1)) == pytest.approx(0.0, abs=1e-12)


def test_density_and_statevector_predictions_agree(rng):
    spec = default_layout(4)
    theta = rng.uniform(-np.pi, np.pi, 15)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    state = StateVector(4, amps / np.linalg.norm(amps))
    p = qcnn_predict(spec, theta, state)
    assert 0.0 <= p <= 1.0
    assert qcnn_predict(spec, theta, to_density(state)) == pytest.approx(p, abs=1e-10)


def test_parameter_length_is_checked():
    with pytest.raises(NumericError):
        build_qcnn(default_layout(4), np.zeros(14))


def test_register_mismatch():
    with pytest.raises(NumericError):
        qcnn_predict(default_layout(4), np.zeros(15), StateVector.zero(3))


def test_layer_validation():
    with pytest.raises(ConfigError):
        LayerSpec(LayerKind.CONV, ((0,),))
    with pytest.raises(ConfigError):
        QcnnSpec(4, (LayerSpec(LayerKind.READOUT, ((3,),)),), readout_qubit=4)
    with pytest.raises(ConfigError):
        default_layout(1)


def test_unshared_layers_count_per_group():
    layer = LayerSpec(LayerKind.ROTATION, ((0,), (1,), (2,)), shared=False)
    assert layer.n_params == 3
    assert LayerSpec(LayerKind.POOL, ((0, 1), (2, 3))).n_params == 2


def test_layout_serialization():
    spec = default_layout(6)
    assert QcnnSpec.from_dict(spec.to_dict()) == spec
