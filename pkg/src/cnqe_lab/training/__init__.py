"""Training loops for the interface, the QCNN and the classical baselines."""

from .cnqe import ExperimentSetup, cnqe_train, select_median_run
from .qcnn import qcnn_train, qcnn_train_runs
from .baseline import head_train_runs, autoencoder_pipeline

__all__ = [
    "ExperimentSetup",
    "cnqe_train",
    "select_median_run",
    "qcnn_train",
    "qcnn_train_runs",
    "head_train_runs",
    "autoencoder_pipeline",
]
