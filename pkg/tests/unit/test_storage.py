import json

import numpy as np
import pytest

from cnqe_lab.core.errors import DataError
from cnqe_lab.core.runs import TrainRun
from cnqe_lab.nn.interface import InterfaceModel
from cnqe_lab.quantum.ansatz import default_layout
from cnqe_lab.services import reports
from cnqe_lab.services.storage import ArtifactStore, csv_text, dumps, load_checkpoint, read_csv, read_json


def _run(phase="cnqe", run_id=0):
    run = TrainRun(phase, run_id, 7, np.array([0.1, -2.5, 3.0]))
    run.record(0, "trace_distance", 0.25)
    run.record(1, "nqe_loss", 0.125)
    run.metrics = {"trace_distance": 0.25}
    run.best_step = 0
    return run


def test_store_creates_checkpoint_dir_on_first_save(out_dir):
    store = ArtifactStore(out_dir / "nested")
    assert store.output_dir.is_dir()
    assert not store.checkpoint_dir.exists()


async def test_checkpoint_round_trip(out_dir):
    store = ArtifactStore(out_dir)
    model = InterfaceModel("GA", 8)
    path = await store.save_checkpoint(_run(), {"interface": model.to_dict(), "qcnn": default_layout(4).to_dict()})
    assert path.name == "cnqe_run0.json"
    assert store.checkpoint_dir.is_dir()
    data = await load_checkpoint(path)
    run = data["run"]
    np.testing.assert_array_equal(run.weights, [0.1, -2.5, 3.0])
    assert run.history == _run().history
    assert run.best_step == 0
    assert data["interface"] == model
    assert data["qcnn"].total_params == 15
    assert data["schema_version"] == 1
    assert sorted(p.name for p in store.checkpoint_dir.iterdir()) == ["cnqe_run0.json"]


async def test_history_csv(out_dir):
    store = ArtifactStore(out_dir)
    path = await store.write_history([_run(), _run("qcnn", 2)])
    rows = read_csv(path)
    assert list(rows[0]) == ["phase", "run_id", "step", "metric", "value"]
    assert len(rows) == 4
    assert rows[-1] == {"phase": "qcnn", "run_id": "2", "step": "1", "metric": "nqe_loss", "value": "0.125"}


async def test_summary_carries_schema_version(out_dir):
    store = ArtifactStore(out_dir)
    path = await store.write_summary({"accuracy": 0.5})
    data = await read_json(path)
    assert data == {"schema_version": 1, "accuracy": 0.5}
    assert path.read_text(encoding="utf-8").endswith("\n")


async def test_read_json_errors(tmp_path):
    with pytest.raises(DataError):
        await read_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{nope", encoding="utf-8")
    with pytest.raises(DataError):
        await read_json(broken)
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(DataError):
        await read_json(listing)


async def test_load_checkpoint_rejects_other_documents(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text(json.dumps({"accuracy": 0.9}), encoding="utf-8")
    with pytest.raises(DataError):
        await load_checkpoint(path)
    path.write_text(json.dumps({"run": {"phase": "cnqe"}}), encoding="utf-8")
    with pytest.raises(DataError):
        await load_checkpoint(path)


def test_csv_text_uses_repr_floats():
    text = csv_text(("a", "b"), [[0.1, "x"], [1, 1e-20]])
    assert text == "a,b\n0.1,x\n1,1e-20\n"


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'


def test_read_csv_errors(tmp_path):
    with pytest.raises(DataError):
        read_csv(tmp_path / "none.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(DataError):
        read_csv(empty)


def test_records_from_rows():
    records = reports.records_from_rows([{"interface": "GA", "trace_distance": "0.5"}])
    assert records[0]["trace_distance"] == 0.5
    with pytest.raises(DataError):
        reports.records_from_rows([{"interface": "GA"}])
    with pytest.raises(DataError):
        reports.records_from_rows([{"trace_distance": "high"}])


def test_component_rows_skip_missing_components():
    records = [{"interface": level, "trace_distance": value}
               for level, value in [("GA", 0.1), ("GA", 0.2), ("GB", 0.4), ("GB", 0.5)]]
    levels, tests = reports.component_rows(records)
    assert [row[:3] for row in levels] == [["interface", "GA", 2], ["interface", "GB", 2]]
    assert len(tests) == 1
    assert tests[0][:2] == ["interface", "GA vs GB"]


def test_records_from_history_takes_best_evaluation():
    rows = [
        {"phase": "cnqe", "run_id": "0", "step": "0", "metric": "trace_distance", "value": "0.2"},
        {"phase": "cnqe", "run_id": "0", "step": "1", "metric": "nqe_loss", "value": "0.9"},
        {"phase": "cnqe", "run_id": "0", "step": "1", "metric": "trace_distance", "value": "0.6"},
        {"phase": "cnqe", "run_id": "0", "step": "2", "metric": "trace_distance", "value": "0.4"},
        {"phase": "cnqe", "run_id": "1", "step": "0", "metric": "trace_distance", "value": "0.3"},
        {"phase": "qcnn", "run_id": "0", "step": "1", "metric": "trace_distance", "value": "0.99"},
    ]
    summary = {"config": {"train": {"interface": "GB", "loss_kind": "hs", "feature_map": "zz_unit"}}}
    records = reports.records_from_history(rows, summary)
    assert records == [
        {"interface": "GB", "loss_kind": "hs", "feature_map": "zz_unit", "run_id": 0, "trace_distance": 0.6},
        {"interface": "GB", "loss_kind": "hs", "feature_map": "zz_unit", "run_id": 1, "trace_distance": 0.3},
    ]


def test_records_from_history_errors():
    summary = {"config": {"train": {"interface": "GA", "loss_kind": "fidelity", "feature_map": "zz_unit"}}}
    with pytest.raises(DataError):
        reports.records_from_history([], summary)
    with pytest.raises(DataError):
        reports.records_from_history([{"phase": "cnqe", "run_id": "0", "metric": "trace_distance", "value": "x"}],
                                     summary)
    with pytest.raises(DataError):
        reports.records_from_history([], {"accuracy": 0.9})
