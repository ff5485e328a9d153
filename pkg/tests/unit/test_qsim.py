import numpy as np
import pytest

from cnqe_lab.core.errors import NumericError
from cnqe_lab.quantum import gates as g
from cnqe_lab.quantum.noise import depolarizing
from cnqe_lab.quantum.qsim import (
    DensityMatrix,
    GateOp,
    KrausChannel,
    StateVector,
    apply_channel,
    apply_gate,
    circuit_unitary,
    expectation,
    hermitian_eigenvalues,
    hermitian_eigh,
    run_circuit,
    to_density,
)


def random_state(rng, n):
    amps = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return StateVector(n, amps / np.linalg.norm(amps))


def test_basis_flips_and_hadamard():
    one = apply_gate(StateVector.zero(1), g.x(0))
    np.testing.assert_allclose(one.amplitudes, [0, 1])
    plus = apply_gate(StateVector.zero(1), g.h(0))
    np.testing.assert_allclose(plus.amplitudes, [1 / np.sqrt(2)] * 2)


def test_qubit_zero_is_most_significant():
    state = run_circuit([g.x(0)], 2)
    assert np.argmax(np.abs(state.amplitudes)) == 2


def test_rzz_on_zero_state_is_a_phase(rng):
    theta = rng.uniform(-np.pi, np.pi)
    state = run_circuit([g.rzz(0, 1, theta)], 2)
    np.testing.assert_allclose(state.amplitudes, [np.exp(-0.5j * theta), 0, 0, 0], atol=1e-12)


def test_circuit_unitary_examples():
    np.testing.assert_allclose(circuit_unitary([], 2), np.eye(4))
    np.testing.assert_allclose(circuit_unitary([g.h(0)], 1), g.H)
    np.testing.assert_allclose(circuit_unitary([g.cx(0, 1), g.cx(0, 1)], 2), np.eye(4), atol=1e-12)


def test_circuit_unitary_orders_gates_by_application():
    u = circuit_unitary([g.h(0), g.s(0)], 1)
    np.testing.assert_allclose(u, g.S @ g.H)


def test_rejects_bad_states_and_gates():
    with pytest.raises(NumericError):
        StateVector(1, [1.0, 1.0])
    with pytest.raises(NumericError):
        GateOp(np.array([[1, 1], [0, 1]]), (0,), "shear")
    with pytest.raises(NumericError):
        run_circuit([g.cx(0, 2)], 2)
    with pytest.raises(NumericError):
        g.cx(1, 1)


def test_density_of_pure_states(rng):
    np.testing.assert_allclose(to_density(StateVector.zero(1)).entries, np.diag([1, 0]))
    plus = to_density(run_circuit([g.h(0)], 1))
    np.testing.assert_allclose(plus.entries, np.full((2, 2), 0.5), atol=1e-12)
    assert abs(to_density(random_state(rng, 2)).purity() - 1.0) < 1e-10


def test_channels_on_ground_state():
    rho = to_density(StateVector.zero(1))
    identity = KrausChannel((np.eye(2),), (0,))
    np.testing.assert_allclose(apply_channel(rho, identity).entries, rho.entries)
    np.testing.assert_allclose(apply_channel(rho, depolarizing(1.0)).entries, np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(apply_channel(rho, depolarizing(0.5)).entries, np.diag([0.75, 0.25]), atol=1e-12)


def test_incomplete_channel_rejected():
    with pytest.raises(NumericError):
        KrausChannel((0.5 * np.eye(2),), (0,))


def test_hermitian_eigenvalues_examples(rng):
    np.testing.assert_allclose(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [3, 2, 1])
    np.testing.assert_allclose(hermitian_eigenvalues(g.X), [1, -1], atol=1e-12)
    a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    m = a + a.conj().T
    values = hermitian_eigenvalues(m)
    assert abs(values.sum() - np.trace(m).real) < 1e-8
    assert abs(np.sum(values ** 2) - np.trace(m @ m).real) < 1e-8
    np.testing.assert_allclose(values, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-8)


def test_eigenvectors_diagonalize(rng):
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    m = a + a.conj().T
    values, vectors = hermitian_eigh(m)
    np.testing.assert_allclose(vectors.conj().T @ m @ vectors, np.diag(values), atol=1e-9)


def test_non_hermitian_rejected():
    with pytest.raises(NumericError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


def test_expectation_examples():
    assert expectation(StateVector.zero(1), g.Z) == pytest.approx(1.0)
    assert expectation(run_circuit([g.h(0)], 1), g.Z) == pytest.approx(0.0, abs=1e-12)
    state = StateVector(1, [np.sqrt(0.3), np.sqrt(0.7)])
    assert expectation(state, g.Z) == pytest.approx(-0.4)
    assert expectation(to_density(state), g.Z) == pytest.approx(-0.4)


def test_density_matrix_validation():
    with pytest.raises(NumericError):
        DensityMatrix(1, np.diag([0.6, 0.6]))
    with pytest.raises(NumericError):
        DensityMatrix(1, np.diag([1.5, -0.5]))
