"""Core modules for cnqe-lab."""

from .config import ExperimentConfig, TrainConfig, DatasetConfig, NoiseConfig, BaselineConfig, load_config
from .errors import CnqeError, ConfigError, DataError, NumericError
from .rng import RngFactory, make_stream
from .router import Backend, BackendRouter, PredictionResult, SimilarityResult
from .runs import HistoryEntry, TrainRun

__all__ = [
    "ExperimentConfig",
    "TrainConfig",
    "DatasetConfig",
    "NoiseConfig",
    "BaselineConfig",
    "load_config",
    "CnqeError",
    "ConfigError",
    "DataError",
    "NumericError",
    "RngFactory",
    "make_stream",
    "Backend",
    "BackendRouter",
    "PredictionResult",
    "SimilarityResult",
    "HistoryEntry",
    "TrainRun",
]
