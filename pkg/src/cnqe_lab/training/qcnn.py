"""
Classifier training on a frozen embedding.

Class 1 is assigned to readout outcome 0: the QCNN readout probability p
is regressed onto the label with an MSE loss and thresholded at 1/2.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from ..core.config import QcnnConfig, TrainConfig
from ..core.errors import NumericError
from ..core.rng import RngFactory
from ..core.runs import TrainRun
from ..data.records import DatasetSplit
from ..metrics.classification import accuracy, classification_report
from ..metrics.distance import feature_ensemble_pair, trace_distance
from ..nn.interface import InterfaceModel, interface_features
from ..quantum.ansatz import QcnnSpec, default_layout
from .cnqe import ExperimentSetup
from .losses import vqa_mse_gradient
from .optim import AdamState, adam_step

logger = logging.getLogger(__name__)

HELSTROM_SLACK = 0.02


def qcnn_spec_for(config: TrainConfig, override: Optional[QcnnConfig] = None) -> QcnnSpec:
    return override.to_spec(config.n_qubits) if override is not None else default_layout(config.n_qubits)


def init_theta(qcnn: QcnnSpec, mode: str, rng: np.random.Generator) -> np.ndarray:
    if mode == "zeros":
        return np.zeros(qcnn.total_params)
    return rng.uniform(0.0, 2.0 * np.pi, size=qcnn.total_params)


def predict_labels(setup: ExperimentSetup, qcnn: QcnnSpec, theta: np.ndarray,
                   features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Readout probabilities and thresholded labels for embedding features."""
    if features.shape[0] == 0:
        return np.zeros(0), np.zeros(0, dtype=int)
    p = setup.backend.predict(qcnn, theta, setup.spec, features, with_grad=False).probabilities
    return p, (p >= 0.5).astype(int)


def helstrom_ceiling(distance: float) -> float:
    return min(1.0, 0.5 + distance) + HELSTROM_SLACK


def qcnn_train(config: TrainConfig, split: DatasetSplit, setup: ExperimentSetup,
               interface_weights: np.ndarray, run_id: int, rngs: RngFactory,
               qcnn: Optional[QcnnSpec] = None, model: Optional[InterfaceModel] = None,
               phase: str = "qcnn") -> TrainRun:
    """Train QCNN parameters on features of a frozen interface; ``model`` overrides ``setup.model``."""
    model = model or setup.model
    qcnn = qcnn or default_layout(setup.spec.n_qubits)
    snapshot = np.array(interface_weights, dtype=float, copy=True)

    train_features = interface_features(model, split.train.images, interface_weights)
    test_features = interface_features(model, split.test.images, interface_weights)
    train_labels, test_labels = split.train.labels, split.test.labels

    theta = init_theta(qcnn, config.qcnn_init, rngs.stream(f"{phase}/run{run_id}/init"))
    shuffle = rngs.stream(f"{phase}/run{run_id}/shuffle")
    state = AdamState(theta.size)
    run = TrainRun(phase, run_id, rngs.seed, theta.copy(), metadata={"qcnn": qcnn.to_dict()})

    n = train_labels.shape[0]
    for epoch in range(1, config.qcnn_epochs + 1):
        order = shuffle.permutation(n)
        losses = []
        for start in range(0, n, config.qcnn_batch):
            idx = order[start:start + config.qcnn_batch]
            result = setup.backend.predict(qcnn, theta, setup.spec, train_features[idx], with_grad=True)
            loss, grad = vqa_mse_gradient(result.probabilities, train_labels[idx], result.gradients)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise NumericError(f"{phase} run {run_id} diverged in epoch {epoch} (loss={loss})")
            theta = adam_step(state, theta, grad, config.learning_rate)
            losses.append(loss)
        _, test_pred = predict_labels(setup, qcnn, theta, test_features)
        test_acc = accuracy(test_pred, test_labels)
        run.record(epoch, "vqa_loss", float(np.mean(losses)))
        run.record(epoch, "test_accuracy", test_acc)
        logger.info(f"{phase} run {run_id} epoch {epoch}: loss={np.mean(losses):.5f} test_accuracy={test_acc:.4f}")

    if not np.array_equal(snapshot, np.asarray(interface_weights)):
        raise NumericError(f"{phase} run {run_id} modified the frozen interface weights")

    _, train_pred = predict_labels(setup, qcnn, theta, train_features)
    _, test_pred = predict_labels(setup, qcnn, theta, test_features)
    train_acc = accuracy(train_pred, train_labels)
    train_distance = trace_distance(feature_ensemble_pair(setup.backend, setup.spec, train_features, train_labels))
    if train_acc > helstrom_ceiling(train_distance):
        raise NumericError(f"{phase} run {run_id}: training accuracy {train_acc:.4f} exceeds the Helstrom "
                           f"ceiling for trace distance {train_distance:.4f}")

    report = classification_report(test_pred, test_labels)
    run.weights = theta
    run.metrics = {
        "train_accuracy": train_acc,
        "train_trace_distance": train_distance,
        "test_accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "n_params": float(qcnn.total_params),
    }
    run.metadata["zero_division"] = report.zero_division
    return run


def qcnn_train_runs(config: TrainConfig, split: DatasetSplit, setup: ExperimentSetup,
                    interface_weights: np.ndarray, rngs: RngFactory, qcnn: Optional[QcnnSpec] = None,
                    model: Optional[InterfaceModel] = None, phase: str = "qcnn",
                    threads: int = 1) -> List[TrainRun]:
    """``n_runs`` classifier runs on one frozen embedding."""
    def one(run_id: int) -> TrainRun:
        return qcnn_train(config, split, setup, interface_weights, run_id, rngs, qcnn, model, phase)

    if threads > 1 and config.n_runs > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(config.n_runs)))
    return [one(r) for r in range(config.n_runs)]
