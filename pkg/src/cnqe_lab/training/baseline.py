"""
Classical comparisons: small heads on frozen interface outputs, and an
autoencoder whose encoder replaces the trained interface.
"""

import logging
from typing import List, Tuple

import numpy as np

from ..core.config import BaselineConfig, TrainConfig
from ..core.errors import ConfigError, NumericError
from ..core.rng import RngFactory
from ..core.runs import TrainRun
from ..data.records import DatasetSplit
from ..metrics.classification import classification_report
from ..metrics.distance import feature_ensemble_pair, trace_distance
from ..nn.autodiff import Tensor, cross_entropy
from ..nn.autoencoder import AutoencoderModel, autoencoder_step
from ..nn.baselines import BaselineHead, forward_baseline
from ..nn.interface import InterfaceKind, interface_features
from ..quantum.ansatz import QcnnSpec
from .cnqe import ExperimentSetup
from .optim import AdamState, adam_step
from .qcnn import qcnn_train

logger = logging.getLogger(__name__)


def head_train(config: TrainConfig, baseline: BaselineConfig, split: DatasetSplit, setup: ExperimentSetup,
               interface_weights: np.ndarray, run_id: int, rngs: RngFactory) -> TrainRun:
    """Cross-entropy training of a classical head on frozen interface outputs."""
    head = BaselineHead(baseline.kind, setup.model.out_dim)
    train_x = interface_features(setup.model, split.train.images, interface_weights)
    test_x = interface_features(setup.model, split.test.images, interface_weights)
    train_y, test_y = split.train.labels, split.test.labels

    weights = head.init_weights(rngs.stream(f"baseline/run{run_id}/init"))
    shuffle = rngs.stream(f"baseline/run{run_id}/shuffle")
    state = AdamState(weights.size)
    run = TrainRun("baseline", run_id, rngs.seed, weights.copy(), metadata={"head": head.to_dict()})

    n = train_y.shape[0]
    for epoch in range(1, baseline.epochs + 1):
        order = shuffle.permutation(n)
        losses = []
        for start in range(0, n, baseline.batch_size):
            idx = order[start:start + baseline.batch_size]
            w = Tensor(weights, requires_grad=True)
            loss = cross_entropy(forward_baseline(head, train_x[idx], w), train_y[idx])
            loss.backward()
            if not np.isfinite(loss.data) or not np.all(np.isfinite(w.grad)):
                raise NumericError(f"baseline run {run_id} diverged in epoch {epoch}")
            weights = adam_step(state, weights, w.grad, config.learning_rate)
            losses.append(float(loss.data))
        run.record(epoch, "ce_loss", float(np.mean(losses)))

    logits = forward_baseline(head, test_x, weights).data if test_x.shape[0] else np.zeros((0, 2))
    report = classification_report(np.argmax(logits, axis=1), test_y)
    run.weights = weights
    run.metrics = {
        "test_accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "n_params": float(head.n_params),
    }
    run.metadata["zero_division"] = report.zero_division
    logger.info(f"baseline {head.kind} run {run_id}: test_accuracy={report.accuracy:.4f}")
    return run


def head_train_runs(config: TrainConfig, baseline: BaselineConfig, split: DatasetSplit,
                    setup: ExperimentSetup, interface_weights: np.ndarray, rngs: RngFactory) -> List[TrainRun]:
    return [head_train(config, baseline, split, setup, interface_weights, r, rngs) for r in range(config.n_runs)]


def autoencoder_setup(config: TrainConfig, setup: ExperimentSetup) -> AutoencoderModel:
    """GA encoders feed 8-feature unit maps; GC encoders feed 24-feature stacks."""
    if setup.model.kind is InterfaceKind.GB:
        raise ConfigError("the autoencoder baseline supports interfaces GA and GC")
    model = AutoencoderModel.create(setup.model.kind, config.n_channels)
    if model.latent_dim != setup.spec.n_features:
        raise ConfigError(f"autoencoder latent has {model.latent_dim} dimensions, "
                          f"{setup.spec.kind.value} needs {setup.spec.n_features}")
    return model


def autoencoder_train(config: TrainConfig, baseline: BaselineConfig, split: DatasetSplit,
                      model: AutoencoderModel, run_id: int, rngs: RngFactory) -> TrainRun:
    """MSE reconstruction training on batches resampled with replacement."""
    weights = model.init_weights(rngs.stream(f"autoencoder/run{run_id}/init"))
    batches = rngs.stream(f"autoencoder/run{run_id}/batches")
    state = AdamState(weights.size)
    run = TrainRun("autoencoder", run_id, rngs.seed, weights.copy(),
                   metadata={"encoder": model.encoder.to_dict(), "latent_dim": model.latent_dim})
    images = split.train.images
    loss_value = float("nan")
    for step in range(1, baseline.ae_iterations + 1):
        idx = batches.integers(0, images.shape[0], size=baseline.batch_size)
        w = Tensor(weights, requires_grad=True)
        _, loss = autoencoder_step(model, images[idx], w)
        loss.backward()
        loss_value = float(loss.data)
        if not np.isfinite(loss_value) or not np.all(np.isfinite(w.grad)):
            raise NumericError(f"autoencoder run {run_id} diverged at iteration {step}")
        weights = adam_step(state, weights, w.grad, config.learning_rate)
        run.record(step, "mse", loss_value)
        if step % config.eval_every == 0:
            logger.info(f"autoencoder run {run_id} iteration {step}: mse={loss_value:.6f}")
    run.weights = weights
    run.metrics = {"final_mse": loss_value}
    return run


def autoencoder_pipeline(config: TrainConfig, baseline: BaselineConfig, split: DatasetSplit,
                         setup: ExperimentSetup, rngs: RngFactory,
                         qcnn: QcnnSpec) -> Tuple[TrainRun, List[TrainRun]]:
    """Train the autoencoder, keep its encoder, then train the QCNN on the latent embedding."""
    model = autoencoder_setup(config, setup)
    ae_run = autoencoder_train(config, baseline, split, model, 0, rngs)
    encoder_weights = model.encoder_weights(ae_run.weights)
    test_features = interface_features(model.encoder, split.test.images, encoder_weights)
    distance = trace_distance(feature_ensemble_pair(setup.backend, setup.spec, test_features, split.test.labels))
    ae_run.metrics["trace_distance"] = distance
    logger.info(f"autoencoder latent embedding: test trace_distance={distance:.5f}")
    qcnn_runs = [qcnn_train(config, split, setup, encoder_weights, r, rngs, qcnn, model.encoder, "ae_qcnn")
                 for r in range(config.n_runs)]
    return ae_run, qcnn_runs
