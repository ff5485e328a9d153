import json
from pathlib import Path

import pytest

from cnqe_lab.core.config import (
    ExperimentConfig,
    TrainConfig,
    create_default_config,
    default_config_data,
    expand_env_vars,
    load_config,
    parse_config,
)
from cnqe_lab.core.errors import CnqeError, ConfigError, DataError, NumericError


def test_error_exit_codes():
    assert ConfigError("x").exit_code == 2
    assert DataError("x").exit_code == 3
    assert NumericError("x").exit_code == 4
    assert isinstance(ConfigError("x"), ValueError)
    payload = DataError("missing").to_dict()
    assert payload == {"error": {"type": "DataError", "message": "missing"}, "exit_code": 3}
    assert issubclass(NumericError, CnqeError)


def test_defaults_round_trip():
    config = parse_config(default_config_data())
    assert config.train.interface == "GA"
    assert config.train.feature_map == "zz_unit"
    assert config.schema_version == 1
    again = parse_config(config.model_dump(mode="json"))
    assert again == config


def test_unknown_key_rejected():
    data = default_config_data()
    data["train"]["learning_rat"] = 0.1
    with pytest.raises(ConfigError):
        parse_config(data)


def test_invalid_loss_name():
    data = default_config_data()
    data["train"]["loss_kind"] = "kl"
    with pytest.raises(ConfigError):
        parse_config(data)


def test_feature_map_letters_resolve():
    assert TrainConfig(feature_map="b").feature_map == "ncx_unit"
    with pytest.raises(ValueError):
        TrainConfig(feature_map="spiral")


def test_interface_and_map_must_agree():
    with pytest.raises(ValueError):
        TrainConfig(interface="GA", feature_map="zz")
    with pytest.raises(ValueError):
        TrainConfig(interface="GC", feature_map="zz_unit")
    assert TrainConfig(interface="gc", feature_map="ncl").interface == "GC"


def test_density_backend_needs_fidelity():
    data = default_config_data()
    data["train"].update({"backend": "density", "loss_kind": "hs"})
    with pytest.raises(ConfigError):
        parse_config(data)


def test_env_expansion(monkeypatch):
    monkeypatch.setenv("CNQE_TEST_OUT", "/tmp/somewhere")
    data = expand_env_vars({"a": "${CNQE_TEST_OUT}", "b": ["${CNQE_TEST_UNSET}"], "c": 1})
    assert data == {"a": "/tmp/somewhere", "b": [None], "c": 1}


def test_dataset_path_falls_back_to_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CNQE_DATA_DIR", str(tmp_path))
    config = parse_config({"dataset": {"source": "cifar10"}})
    assert config.dataset.resolved_path() == tmp_path


def test_load_json_and_toml(tmp_path):
    json_path = tmp_path / "c.json"
    toml_path = tmp_path / "c.toml"
    create_default_config(json_path)
    create_default_config(toml_path)
    assert load_config(json_path) == load_config(toml_path)
    assert json.loads(json_path.read_text())["train"]["seed"] == 7


def test_load_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_overrides_do_not_mutate():
    config = ExperimentConfig()
    changed = config.with_overrides(seed=99, output_dir="elsewhere")
    assert changed.train.seed == 99
    assert changed.output_dir == "elsewhere"
    assert config.train.seed == 0


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[2] / "configs").glob("*.*")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    config = load_config(path)
    assert config.schema_version == 1
    assert config.output_dir.startswith("runs/")
