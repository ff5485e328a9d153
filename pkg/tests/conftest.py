"""Shared fixtures for the cnqe-lab test suite."""

import json
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest

from cnqe_lab.core.config import default_config_data
from cnqe_lab.data.synthetic import synthetic_blobs


def _last_json(output: str) -> Dict[str, Any]:
    """The last JSON object line of a CLI invocation's output."""
    for line in reversed(output.strip().splitlines()):
        line = line.strip()
        if line.startswith("{"):
            return json.loads(line)
    raise AssertionError(f"no JSON line in output:\n{output}")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_split():
    """8 train and 2 test images per class, well separated."""
    return synthetic_blobs(n_per_class=10, margin_sigma=10.0, seed=3)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def tiny_config(tmp_path: Path) -> Path:
    """A blobs config small enough to train inside a unit test."""
    data = default_config_data()
    data["train"].update({
        "cnqe_iterations": 2,
        "cnqe_batch_pairs": 4,
        "qcnn_epochs": 1,
        "n_runs": 1,
        "eval_every": 1,
    })
    data["dataset"].update({"n_per_class": 10})
    data["output_dir"] = str(tmp_path / "run")
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture
def last_json():
    return _last_json
