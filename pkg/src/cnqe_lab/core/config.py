"""
Experiment configuration for cnqe-lab.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

# Load .env file if it exists
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # python-dotenv not installed, skip
    pass

SCHEMA_VERSION = 1
DATA_DIR_ENV = "CNQE_DATA_DIR"


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TrainConfig(_Frozen):
    learning_rate: float = Field(0.01, gt=0)
    cnqe_batch_pairs: int = Field(25, ge=1)
    cnqe_iterations: int = Field(2000, ge=0)
    qcnn_batch: int = Field(5, ge=1)
    qcnn_epochs: int = Field(20, ge=0)
    n_runs: int = Field(5, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    loss_kind: Literal["fidelity", "hs", "hs_abs"] = "fidelity"
    feature_map: str = "zz_unit"
    interface: Literal["GA", "GB", "GC"] = "GA"
    eval_every: int = Field(50, ge=1)
    n_qubits: int = Field(4, ge=2, le=10)
    n_channels: int = Field(3, ge=1)
    qcnn_init: Literal["uniform", "zeros"] = "uniform"
    backend: Literal["statevector", "density"] = "statevector"

    @field_validator("interface", mode="before")
    @classmethod
    def _upper_interface(cls, value: Any) -> Any:
        return value.upper() if isinstance(value, str) else value

    @field_validator("feature_map")
    @classmethod
    def _known_feature_map(cls, value: str) -> str:
        from ..quantum.embeddings import FeatureMapKind

        return FeatureMapKind.parse(value).value

    @model_validator(mode="after")
    def _compatible(self) -> "TrainConfig":
        from ..quantum.embeddings import STACK_DEPTH, FeatureMapKind

        stacked = FeatureMapKind.parse(self.feature_map).is_stacked
        if self.interface == "GA" and stacked:
            raise ValueError(f"interface GA feeds one embedding layer; {self.feature_map} is a stack")
        if self.interface in ("GB", "GC"):
            if not stacked:
                raise ValueError(f"interface {self.interface} needs a stacked feature map, got {self.feature_map}")
            if self.n_channels != STACK_DEPTH:
                raise ValueError(f"stacked maps have {STACK_DEPTH} layers; n_channels is {self.n_channels}")
        return self


class DatasetConfig(_Frozen):
    source: Literal["cifar10", "raw", "blobs"] = "blobs"
    path: Optional[str] = None
    class_a: int = Field(6, ge=0, le=9)
    class_b: int = Field(8, ge=0, le=9)
    seed: int = Field(0, ge=0)
    train_per_class: int = Field(400, ge=1)
    test_per_class: int = Field(100, ge=1)
    n_per_class: int = Field(500, ge=2)
    margin_sigma: float = Field(10.0, ge=0)
    sigma: float = Field(0.02, gt=0)

    @model_validator(mode="after")
    def _distinct_classes(self) -> "DatasetConfig":
        if self.source == "cifar10" and self.class_a == self.class_b:
            raise ValueError("class_a and class_b must differ")
        return self

    def resolved_path(self) -> Optional[Path]:
        """Explicit path, else the CNQE_DATA_DIR fallback."""
        if self.path:
            return Path(self.path).expanduser()
        env = os.getenv(DATA_DIR_ENV)
        return Path(env).expanduser() if env else None


class NoiseConfig(_Frozen):
    preset: Optional[str] = None
    t1_us: Optional[float] = None
    t2_us: Optional[float] = None
    p1q: Optional[float] = None
    p2q: Optional[float] = None
    p_meas: Optional[float] = None
    dur_1q_us: Optional[float] = None
    dur_2q_us: Optional[float] = None
    dur_meas_us: Optional[float] = None

    def overrides(self) -> Dict[str, float]:
        return {k: v for k, v in self.model_dump(exclude={"preset"}).items() if v is not None}


class BaselineConfig(_Frozen):
    kind: Literal["linear", "bottleneck", "cnn1d", "autoencoder"] = "linear"
    epochs: int = Field(50, ge=0)
    batch_size: int = Field(25, ge=1)
    ae_iterations: int = Field(2000, ge=0)


class LayerOverride(_Frozen):
    kind: Literal["conv", "pool", "rotation", "readout"]
    pairs: List[List[int]]
    shared: bool = True


class QcnnConfig(_Frozen):
    """Replaces the default ansatz layout; the readout qubit defaults to the last readout block."""

    layout: List[LayerOverride]
    readout_qubit: Optional[int] = None

    def to_spec(self, n_qubits: int):
        from ..quantum.ansatz import LayerSpec, QcnnSpec

        layers = tuple(LayerSpec(layer.kind, tuple(tuple(p) for p in layer.pairs), layer.shared)
                       for layer in self.layout)
        readout = self.readout_qubit
        if readout is None:
            blocks = [layer for layer in layers if layer.kind.value == "readout"]
            readout = blocks[-1].pairs[0][0] if blocks else n_qubits - 1
        return QcnnSpec(n_qubits, layers, readout)


class ExperimentConfig(_Frozen):
    schema_version: Literal[1] = SCHEMA_VERSION
    train: TrainConfig = Field(default_factory=TrainConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    noise: Optional[NoiseConfig] = None
    baseline: Optional[BaselineConfig] = None
    qcnn: Optional[QcnnConfig] = None
    output_dir: str = "runs/latest"

    @model_validator(mode="after")
    def _noise_backend(self) -> "ExperimentConfig":
        if self.train.backend == "density" and self.train.loss_kind != "fidelity":
            raise ValueError("the density backend supports the fidelity loss only")
        return self

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None) -> "ExperimentConfig":
        config = self
        if seed is not None:
            config = config.model_copy(update={"train": config.train.model_copy(update={"seed": seed})})
        if output_dir is not None:
            config = config.model_copy(update={"output_dir": output_dir})
        return config


def expand_env_vars(data: Any) -> Any:
    """Recursively expand ``${VAR}`` strings from the environment."""
    if isinstance(data, dict):
        return {k: expand_env_vars(v) for k, v in data.items()}
    elif isinstance(data, list):
        return [expand_env_vars(item) for item in data]
    elif isinstance(data, str) and data.startswith("${") and data.endswith("}"):
        # Missing variables become None so optional fields fall back to defaults
        return os.getenv(data[2:-1])
    return data


def _drop_none(data: Any) -> Any:
    if isinstance(data, dict):
        return {k: _drop_none(v) for k, v in data.items() if v is not None}
    return data


def _read_document(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".toml":
            data = toml.loads(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, toml.TomlDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(_drop_none(expand_env_vars(data)))
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load and validate a JSON or TOML experiment configuration."""
    return parse_config(_read_document(Path(path)))


def default_config_data() -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "train": {
            "learning_rate": 0.01,
            "cnqe_batch_pairs": 25,
            "cnqe_iterations": 500,
            "qcnn_batch": 5,
            "qcnn_epochs": 20,
            "n_runs": 3,
            "seed": 7,
            "loss_kind": "fidelity",
            "feature_map": "zz_unit",
            "interface": "GA",
        },
        "dataset": {
            "source": "blobs",
            "n_per_class": 500,
            "margin_sigma": 10.0,
            "seed": 7,
            "train_per_class": 400,
            "test_per_class": 100,
        },
        "output_dir": "runs/blobs",
    }


def create_default_config(config_file: Path) -> None:
    """Write a runnable synthetic-blobs configuration."""
    config_file = Path(config_file)
    config_file.parent.mkdir(parents=True, exist_ok=True)
    data = default_config_data()
    if config_file.suffix.lower() == ".toml":
        config_file.write_text(toml.dumps(data), encoding="utf-8")
    else:
        config_file.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
