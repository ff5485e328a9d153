import numpy as np
import pytest

from cnqe_lab.core.errors import NumericError
from cnqe_lab.training.optim import AdamState, adam_step
from cnqe_lab.training.pairs import sample_pairs


def test_first_adam_step_moves_by_learning_rate():
    state = AdamState(3)
    params = adam_step(state, np.zeros(3), np.array([2.0, -0.5, 0.0]), 0.01)
    np.testing.assert_allclose(params, [-0.01, 0.01, 0.0], atol=1e-8)
    assert state.step == 1


def test_adam_minimizes_quadratic():
    state = AdamState(2)
    x = np.array([3.0, -2.0])
    for _ in range(2000):
        x = adam_step(state, x, 2.0 * x, 0.05)
    np.testing.assert_allclose(x, [0.0, 0.0], atol=0.1)


def test_adam_shape_checks():
    with pytest.raises(NumericError):
        adam_step(AdamState(2), np.zeros(3), np.zeros(3), 0.1)
    with pytest.raises(NumericError):
        AdamState(2, m=np.zeros(3))


def test_pairs_are_distinct_and_labelled(rng):
    labels = np.array([0, 0, 1, 1, 1])
    batch = sample_pairs(labels, 200, rng)
    assert len(batch) == 200
    assert np.all(batch.first != batch.second)
    np.testing.assert_array_equal(batch.delta, labels[batch.first] == labels[batch.second])
    assert set(batch.first.tolist()) == set(range(5))


def test_pair_sampling_is_deterministic():
    labels = np.array([0, 1, 0, 1])
    a = sample_pairs(labels, 10, np.random.default_rng(7))
    b = sample_pairs(labels, 10, np.random.default_rng(7))
    np.testing.assert_array_equal(a.first, b.first)
    np.testing.assert_array_equal(a.second, b.second)


def test_pair_sampling_limits(rng):
    with pytest.raises(NumericError):
        sample_pairs(np.array([1]), 3, rng)
    with pytest.raises(NumericError):
        sample_pairs(np.array([0, 1]), 0, rng)
    two = sample_pairs(np.array([0, 1]), 20, rng)
    assert np.all(two.delta == 0)
