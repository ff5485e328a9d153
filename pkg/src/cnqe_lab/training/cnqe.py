"""
Embedding training: interface weights are optimized so that the embedded
class ensembles separate, measured by the test trace distance.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..core.config import TrainConfig
from ..core.errors import NumericError
from ..core.rng import RngFactory
from ..core.router import Backend, BackendRouter, SimilarityResult
from ..core.runs import TrainRun
from ..data.records import DatasetSplit, Partition
from ..metrics.distance import feature_ensemble_pair, trace_distance
from ..nn.autodiff import Tensor
from ..nn.interface import InterfaceModel, forward_interface, interface_features
from ..quantum.embeddings import EmbeddingSpec
from .losses import PairBatch, nqe_loss
from .optim import AdamState, adam_step
from .pairs import sample_pairs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentSetup:
    """Embedding, interface architecture and simulation backend of one configuration."""

    spec: EmbeddingSpec
    model: InterfaceModel
    backend: Backend

    @classmethod
    def from_config(cls, config: TrainConfig, router: BackendRouter) -> "ExperimentSetup":
        spec = EmbeddingSpec(config.feature_map, config.n_qubits)
        model = InterfaceModel(config.interface, spec.unit_features, config.n_channels)
        if model.out_dim != spec.n_features:
            raise NumericError(f"interface {model.kind.value} emits {model.out_dim} features, "
                               f"{spec.kind.value} consumes {spec.n_features}")
        return cls(spec, model, router.resolve(config.backend))


def evaluate_trace_distance(setup: ExperimentSetup, weights: np.ndarray, partition: Partition) -> float:
    features = interface_features(setup.model, partition.images, weights)
    return trace_distance(feature_ensemble_pair(setup.backend, setup.spec, features, partition.labels))


def nqe_loss_and_gradient(setup: ExperimentSetup, weights: np.ndarray, images: np.ndarray,
                          batch: PairBatch, loss_kind: str) -> Tuple[float, np.ndarray]:
    """Pair loss mean (f - delta)^2 and its gradient with respect to the interface weights."""
    rows = np.unique(np.concatenate([batch.first, batch.second]))
    local = PairBatch(np.searchsorted(rows, batch.first), np.searchsorted(rows, batch.second), batch.delta)
    w = Tensor(weights, requires_grad=True)
    features = forward_interface(setup.model, images[rows], w)
    values = features.data
    results: List[SimilarityResult] = []

    def similarity(feat1: np.ndarray, feat2: np.ndarray) -> float:
        result = setup.backend.similarity(setup.spec, feat1, feat2, loss_kind, True)
        results.append(result)
        return result.value

    loss = nqe_loss(similarity, local, values)
    upstream = np.zeros_like(values)
    k = len(local)
    for ri, rj, delta, result in zip(local.first, local.second, local.delta, results):
        err = result.value - delta
        upstream[ri] += 2.0 * err * result.grad1 / k
        upstream[rj] += 2.0 * err * result.grad2 / k
    features.backward(upstream)
    grad = w.grad if w.grad is not None else np.zeros_like(weights)
    return loss, grad


def train_run(config: TrainConfig, split: DatasetSplit, setup: ExperimentSetup, run_id: int,
              rngs: RngFactory) -> TrainRun:
    """One embedding run; the returned weights are the best checkpoint by test trace distance."""
    init = rngs.stream(f"cnqe/run{run_id}/init")
    pair_rng = rngs.stream(f"cnqe/run{run_id}/pairs")
    weights = setup.model.init_weights(init)
    state = AdamState(weights.size)
    run = TrainRun("cnqe", run_id, rngs.seed, weights.copy(), metadata={
        "interface": setup.model.to_dict(),
        "feature_map": setup.spec.kind.value,
        "n_qubits": setup.spec.n_qubits,
        "loss_kind": config.loss_kind,
        "backend": setup.backend.describe(),
    })

    best = evaluate_trace_distance(setup, weights, split.test)
    best_step, best_weights = 0, weights.copy()
    run.record(0, "trace_distance", best)
    loss = float("nan")
    for step in range(1, config.cnqe_iterations + 1):
        batch = sample_pairs(split.train.labels, config.cnqe_batch_pairs, pair_rng)
        loss, grad = nqe_loss_and_gradient(setup, weights, split.train.images, batch, config.loss_kind)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NumericError(f"cnqe run {run_id} diverged at iteration {step} (loss={loss})")
        weights = adam_step(state, weights, grad, config.learning_rate)
        run.record(step, "nqe_loss", loss)
        if step % config.eval_every == 0 or step == config.cnqe_iterations:
            distance = evaluate_trace_distance(setup, weights, split.test)
            run.record(step, "trace_distance", distance)
            logger.info(f"cnqe run {run_id} iteration {step}: loss={loss:.5f} trace_distance={distance:.5f}")
            if distance > best:
                best, best_step, best_weights = distance, step, weights.copy()

    run.weights = best_weights
    run.best_step = best_step
    run.metrics = {"trace_distance": best, "final_loss": loss, "iterations": float(config.cnqe_iterations)}
    return run


def cnqe_train(config: TrainConfig, split: DatasetSplit, setup: ExperimentSetup, rngs: RngFactory,
               threads: int = 1) -> List[TrainRun]:
    """Independent embedding runs 0..n_runs-1, returned in run order."""
    run_ids = range(config.n_runs)
    if threads > 1 and config.n_runs > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda r: train_run(config, split, setup, r, rngs), run_ids))
    return [train_run(config, split, setup, r, rngs) for r in run_ids]


def select_median_run(runs: Sequence[TrainRun], metric: str = "trace_distance") -> TrainRun:
    """Run holding the median ``metric``; ties go to the lowest run id."""
    if not runs:
        raise NumericError("no runs to select from")
    if len(runs) % 2 == 0:
        raise NumericError(f"median selection needs an odd number of runs, got {len(runs)}")
    values = sorted(run.metrics[metric] for run in runs)
    median = values[len(values) // 2]
    chosen = min((run for run in runs if run.metrics[metric] == median), key=lambda run: run.run_id)
    logger.info(f"Selected cnqe run {chosen.run_id} with median {metric}={median:.5f}")
    return chosen


def frozen_weights(run: TrainRun) -> np.ndarray:
    weights = np.array(run.weights, dtype=float)
    weights.setflags(write=False)
    return weights

