import numpy as np
import pytest

from cnqe_lab.core.errors import NumericError
from cnqe_lab.quantum.embeddings import EmbeddingSpec
from cnqe_lab.training.losses import (
    PairBatch,
    fidelity_similarity,
    helstrom_error_bound,
    hs_similarity,
    nqe_loss,
    vqa_mse_gradient,
    vqa_mse_loss,
)


def test_nqe_loss_single_pair():
    batch = PairBatch([0], [1], [1])
    assert nqe_loss(lambda a, b: 0.5, batch, np.zeros((2, 3))) == pytest.approx(0.25)


def test_nqe_loss_uses_indexed_rows():
    features = np.array([[0.0], [1.0], [3.0]])
    batch = PairBatch([0, 2], [1, 1], [0, 1])
    loss = nqe_loss(lambda a, b: float(abs(a[0] - b[0])), batch, features)
    assert loss == pytest.approx(((1 - 0) ** 2 + (2 - 1) ** 2) / 2)


def test_similarities_at_equal_features(rng):
    spec = EmbeddingSpec("zz_unit", 3)
    x = rng.uniform(-np.pi, np.pi, spec.n_features)
    assert fidelity_similarity(spec, x, x) == pytest.approx(1.0)
    assert hs_similarity(spec, x, x) == pytest.approx(1.0)
    y = rng.uniform(-np.pi, np.pi, spec.n_features)
    assert 0.0 <= fidelity_similarity(spec, x, y) <= 1.0
    assert -1.0 <= hs_similarity(spec, x, y) <= hs_similarity(spec, x, y, absolute=True) <= 1.0


def test_pair_batch_validation():
    with pytest.raises(NumericError):
        PairBatch([0, 1], [1], [1])
    with pytest.raises(NumericError):
        PairBatch([2], [2], [1])
    with pytest.raises(NumericError):
        PairBatch([0], [1], [2])
    with pytest.raises(NumericError):
        nqe_loss(lambda a, b: 0.0, PairBatch([], [], []), np.zeros((1, 1)))
    flipped = PairBatch([0, 3], [1, 2], [1, 0]).reversed()
    assert flipped.first.tolist() == [1, 2] and flipped.delta.tolist() == [1, 0]


def test_vqa_mse():
    assert vqa_mse_loss([0.9, 0.2], [1, 0]) == pytest.approx(0.025)
    assert vqa_mse_loss([0.5] * 4, [1, 0, 1, 0]) == pytest.approx(0.25)
    with pytest.raises(NumericError):
        vqa_mse_loss([0.5], [1, 0])


def test_vqa_mse_rejects_empty_batches():
    with pytest.raises(NumericError):
        vqa_mse_loss([], [])
    with pytest.raises(NumericError):
        vqa_mse_gradient(np.zeros(0), np.zeros(0), np.zeros((0, 15)))


def test_vqa_gradient_chains_jacobian():
    predictions = np.array([0.9, 0.2])
    jacobian = np.array([[1.0, 0.0], [0.0, 2.0]])
    loss, grad = vqa_mse_gradient(predictions, np.array([1, 0]), jacobian)
    assert loss == pytest.approx(0.025)
    np.testing.assert_allclose(grad, [2 * -0.1 / 2, 2 * 0.2 * 2 / 2])


def test_helstrom_error_bound():
    assert helstrom_error_bound(0.0) == 0.5
    assert helstrom_error_bound(0.5) == 0.0
    assert helstrom_error_bound(0.858) == 0.0
    assert helstrom_error_bound(0.2) == pytest.approx(0.3)
    with pytest.raises(NumericError):
        helstrom_error_bound(1.2)
