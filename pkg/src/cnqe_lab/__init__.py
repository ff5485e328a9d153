"""
CNQE Lab - classical-quantum neural embeddings for image classification

Trains a classical convolutional interface so that the quantum feature map
downstream separates the two classes, then trains a small quantum
convolutional classifier on the frozen embedding.
"""

__version__ = "0.1.0"

from .core.config import ExperimentConfig, load_config
from .core.errors import CnqeError, ConfigError, DataError, NumericError
from .core.rng import RngFactory
from .core.runs import TrainRun

__all__ = [
    "ExperimentConfig",
    "load_config",
    "CnqeError",
    "ConfigError",
    "DataError",
    "NumericError",
    "RngFactory",
    "TrainRun",
]
