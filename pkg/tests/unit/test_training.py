import numpy as np
import pytest

from cnqe_lab.backends import StatevectorBackend, create_router
from cnqe_lab.core.config import BaselineConfig, TrainConfig
from cnqe_lab.core.errors import ConfigError, NumericError
from cnqe_lab.core.rng import RngFactory
from cnqe_lab.core.runs import TrainRun
from cnqe_lab.nn.gradcheck import central_differences, grad_check, relative_error
from cnqe_lab.nn.interface import InterfaceModel, interface_features
from cnqe_lab.quantum.ansatz import default_layout, qcnn_predict
from cnqe_lab.quantum.embeddings import EmbeddingSpec, embed_state
from cnqe_lab.training.baseline import autoencoder_setup, head_train
from cnqe_lab.training.cnqe import (
    ExperimentSetup,
    cnqe_train,
    evaluate_trace_distance,
    frozen_weights,
    nqe_loss_and_gradient,
    select_median_run,
    train_run,
)
from cnqe_lab.training.losses import (
    PairBatch,
    fidelity_similarity,
    hs_similarity,
    nqe_loss,
    vqa_mse_gradient,
    vqa_mse_loss,
)
from cnqe_lab.training.qcnn import helstrom_ceiling, predict_labels, qcnn_train


def _setup(feature_map="ncx_unit"):
    spec = EmbeddingSpec(feature_map, 4)
    return ExperimentSetup(spec, InterfaceModel("GA", spec.unit_features), StatevectorBackend())


def _fast(**overrides):
    values = dict(feature_map="ncx_unit", cnqe_iterations=2, cnqe_batch_pairs=3, eval_every=1,
                  qcnn_epochs=1, qcnn_batch=4, n_runs=1)
    values.update(overrides)
    return TrainConfig(**values)


def _run(run_id, distance):
    return TrainRun("cnqe", run_id, 0, np.zeros(1), metrics={"trace_distance": distance})


def test_median_selection():
    runs = [_run(0, 0.3), _run(1, 0.9), _run(2, 0.5)]
    assert select_median_run(runs).run_id == 2


def test_median_ties_go_to_lowest_run_id():
    runs = [_run(0, 0.1), _run(1, 0.5), _run(2, 0.5), _run(3, 0.5), _run(4, 0.9)]
    assert select_median_run(runs).run_id == 1


def test_median_needs_odd_count():
    with pytest.raises(NumericError):
        select_median_run([_run(0, 0.1), _run(1, 0.2)])
    with pytest.raises(NumericError):
        select_median_run([])


def test_frozen_weights_are_read_only():
    weights = frozen_weights(TrainRun("cnqe", 0, 0, np.arange(4.0)))
    assert not weights.flags.writeable
    with pytest.raises(ValueError):
        weights[0] = 1.0


def test_setup_from_config():
    setup = ExperimentSetup.from_config(_fast(), create_router())
    assert setup.model.out_dim == setup.spec.n_features == 8
    assert setup.backend.name == "statevector"


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("loss_kind", ["fidelity", "hs"])
def test_nqe_gradient_matches_finite_differences(small_split, loss_kind, seed):
    setup = _setup()
    weights = setup.model.init_weights(np.random.default_rng(seed))
    labels = small_split.train.labels
    positives = np.flatnonzero(labels == 1)
    negatives = np.flatnonzero(labels == 0)
    batch = PairBatch(first=[negatives[0], negatives[1], positives[0]],
                      second=[negatives[2], positives[1], positives[2]],
                      delta=[1, 0, 1])

    def fn(w):
        return nqe_loss_and_gradient(setup, w, small_split.train.images, batch, loss_kind)

    tail = np.arange(setup.model.n_params - 24, setup.model.n_params)
    head = np.arange(0, 12)
    assert grad_check(fn, weights, h=1e-6, coordinates=np.concatenate([head, tail]), floor=1e-4) < 1e-3


@pytest.mark.parametrize("loss_kind, similarity", [("fidelity", fidelity_similarity), ("hs", hs_similarity)])
def test_training_loss_is_the_pair_loss(small_split, loss_kind, similarity):
    setup = _setup()
    weights = setup.model.init_weights(np.random.default_rng(4))
    batch = PairBatch(first=[0, 3, 9], second=[5, 12, 1],
                      delta=(small_split.train.labels[[0, 3, 9]] == small_split.train.labels[[5, 12, 1]]))
    loss, _ = nqe_loss_and_gradient(setup, weights, small_split.train.images, batch, loss_kind)
    features = interface_features(setup.model, small_split.train.images, weights)
    expected = nqe_loss(lambda a, b: similarity(setup.spec, a, b), batch, features)
    assert loss == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_qcnn_mse_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    qcnn = default_layout(4)
    spec = EmbeddingSpec("zz_unit", 4)
    features = rng.uniform(-1, 1, (4, spec.n_features))
    labels = rng.integers(0, 2, 4)
    theta = rng.uniform(-np.pi, np.pi, qcnn.total_params)
    result = StatevectorBackend().predict(qcnn, theta, spec, features)
    _, analytic = vqa_mse_gradient(result.probabilities, labels, result.gradients)
    states = [embed_state(spec, row) for row in features]

    def loss(t):
        return vqa_mse_loss([qcnn_predict(qcnn, t, state) for state in states], labels)

    assert relative_error(analytic, central_differences(loss, theta), floor=1e-4) < 1e-3


def test_zero_iterations_keep_initial_weights(small_split):
    setup = _setup()
    run = train_run(_fast(cnqe_iterations=0), small_split, setup, 0, RngFactory(5))
    expected = setup.model.init_weights(RngFactory(5).stream("cnqe/run0/init"))
    np.testing.assert_array_equal(run.weights, expected)
    assert run.best_step == 0
    assert [e.metric for e in run.history] == ["trace_distance"]
    assert run.metrics["trace_distance"] == pytest.approx(evaluate_trace_distance(setup, expected, small_split.test))


def test_runs_are_deterministic(small_split):
    setup = _setup()
    first = train_run(_fast(), small_split, setup, 0, RngFactory(11))
    second = train_run(_fast(), small_split, setup, 0, RngFactory(11))
    np.testing.assert_array_equal(first.weights, second.weights)
    assert first.history == second.history


def test_best_checkpoint_is_kept(small_split):
    run = train_run(_fast(cnqe_iterations=3), small_split, _setup(), 0, RngFactory(4))
    distances = run.series("trace_distance")
    best = max(distances, key=lambda e: e.value)
    assert run.metrics["trace_distance"] == best.value
    assert run.best_step == min(e.step for e in distances if e.value == best.value)
    assert len(run.series("nqe_loss")) == 3


def test_threaded_runs_match_serial(small_split):
    config = _fast(cnqe_iterations=1, n_runs=3)
    serial = cnqe_train(config, small_split, _setup(), RngFactory(8), threads=1)
    threaded = cnqe_train(config, small_split, _setup(), RngFactory(8), threads=2)
    assert [r.run_id for r in threaded] == [0, 1, 2]
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.weights, b.weights)


def test_qcnn_leaves_interface_untouched(small_split):
    setup = _setup()
    run = TrainRun("cnqe", 0, 0, setup.model.init_weights(np.random.default_rng(0)))
    weights = frozen_weights(run)
    before = weights.copy()
    result = qcnn_train(_fast(), small_split, setup, weights, 0, RngFactory(1))
    np.testing.assert_array_equal(weights, before)
    assert result.phase == "qcnn"
    assert result.metrics["n_params"] == 15
    assert 0.0 <= result.metrics["test_accuracy"] <= 1.0
    assert result.metrics["train_accuracy"] <= helstrom_ceiling(result.metrics["train_trace_distance"])
    assert [e.metric for e in result.history] == ["vqa_loss", "test_accuracy"]


def test_helstrom_ceiling():
    assert helstrom_ceiling(0.2) == pytest.approx(0.72)
    assert helstrom_ceiling(0.9) == pytest.approx(1.02)


def test_predict_labels_on_empty_input():
    p, labels = predict_labels(_setup(), default_layout(4), np.zeros(15), np.zeros((0, 8)))
    assert p.shape == (0,) and labels.shape == (0,)


def test_head_training_reports_counts(small_split):
    setup = _setup()
    weights = setup.model.init_weights(np.random.default_rng(0))
    run = head_train(_fast(), BaselineConfig(kind="linear", epochs=1, batch_size=4), small_split, setup,
                     weights, 0, RngFactory(2))
    assert run.phase == "baseline"
    assert run.metrics["n_params"] == 18
    assert len(run.series("ce_loss")) == 1


def test_autoencoder_setup_checks():
    router = create_router()
    ga = ExperimentSetup.from_config(_fast(), router)
    assert autoencoder_setup(_fast(), ga).latent_dim == 8
    gb = ExperimentSetup.from_config(TrainConfig(interface="GB", feature_map="zz"), router)
    with pytest.raises(ConfigError):
        autoencoder_setup(TrainConfig(interface="GB", feature_map="zz"), gb)
    mismatch = ExperimentSetup.from_config(TrainConfig(feature_map="zz_unit"), router)
    with pytest.raises(ConfigError):
        autoencoder_setup(TrainConfig(feature_map="zz_unit"), mismatch)
