"""
End-to-end runs on synthetic blobs: training, noisy evaluation and the
trace distance / accuracy correlation across margins.
"""

import time

import numpy as np
import pytest

from cnqe_lab.backends import create_router
from cnqe_lab.cli import run_train
from cnqe_lab.core.config import NoiseConfig, default_config_data, parse_config
from cnqe_lab.core.rng import RngFactory
from cnqe_lab.data.synthetic import synthetic_blobs
from cnqe_lab.metrics.stats import correlations
from cnqe_lab.quantum.noise import NoiseModel, gate_noise_channels
from cnqe_lab.training.cnqe import ExperimentSetup, evaluate_trace_distance, select_median_run, train_run
from cnqe_lab.training.qcnn import qcnn_train

pytestmark = pytest.mark.slow


def _config(tmp_path, **train):
    data = default_config_data()
    data["train"].update({"n_runs": 1, **train})
    data["output_dir"] = str(tmp_path / "run")
    return parse_config(data)


def test_blobs_reach_acceptance(tmp_path):
    config = _config(tmp_path, cnqe_iterations=500, qcnn_epochs=20)
    started = time.perf_counter()
    summary, runs = run_train(config)
    elapsed = time.perf_counter() - started

    assert summary["trace_distance"] > 0.9
    assert summary["accuracy"] > 0.98
    assert select_median_run(runs).run_id == summary["cnqe"]["selected_run"]
    assert elapsed < 300
    assert (tmp_path / "run" / "summary.json").exists()


def test_reruns_write_identical_summaries(tmp_path):
    config = _config(tmp_path, cnqe_iterations=20, qcnn_epochs=2)
    run_train(config)
    first = (tmp_path / "run" / "summary.json").read_bytes()
    run_train(config)
    assert (tmp_path / "run" / "summary.json").read_bytes() == first


def test_noise_lowers_distance_modestly(tmp_path):
    config = _config(tmp_path, cnqe_iterations=300, qcnn_epochs=10, feature_map="ncx_unit")
    split = synthetic_blobs(n_per_class=100, margin_sigma=10.0, seed=7)
    router = create_router(NoiseConfig(preset="fakevigo"))
    ideal = ExperimentSetup.from_config(config.train, router)
    noisy = ExperimentSetup(ideal.spec, ideal.model, router.resolve("density"))
    rngs = RngFactory(config.train.seed)

    trained = train_run(config.train, split, ideal, 0, rngs)
    clean_distance = evaluate_trace_distance(ideal, trained.weights, split.test)
    noisy_distance = evaluate_trace_distance(noisy, trained.weights, split.test)
    assert noisy_distance < clean_distance

    clean = qcnn_train(config.train, split, ideal, trained.weights, 0, rngs)
    degraded = qcnn_train(config.train, split, noisy, trained.weights, 0, rngs)
    assert clean.metrics["test_accuracy"] - degraded.metrics["test_accuracy"] <= 0.08

    model = NoiseModel.preset("fakevigo")
    for gate in ideal.spec.build(np.linspace(0.1, 0.8, ideal.spec.n_features)):
        for channel in gate_noise_channels(model, gate):
            assert channel.completeness_error() < 1e-10


def test_distance_tracks_accuracy_across_margins(tmp_path):
    points = []
    for loss_kind in ("fidelity", "hs"):
        for margin in (0.0, 0.5, 1.0, 2.0, 4.0, 10.0):
            data = default_config_data()
            data["train"].update({"n_runs": 1, "cnqe_iterations": 100, "qcnn_epochs": 5, "loss_kind": loss_kind})
            data["dataset"].update({"n_per_class": 60, "margin_sigma": margin})
            data["output_dir"] = str(tmp_path / f"{loss_kind}_{margin:g}")
            summary, _ = run_train(parse_config(data))
            points.append((summary["trace_distance"], summary["accuracy"]))
    distances, accuracies = zip(*points)
    assert correlations(distances, accuracies).pearson_r > 0.6
