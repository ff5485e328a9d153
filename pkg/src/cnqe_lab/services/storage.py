"""
Artifact storage for experiment runs.
Writes checkpoints, history, summaries and reports under one output directory.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import aiofiles

from ..core.errors import DataError
from ..core.runs import TrainRun
from ..nn.interface import InterfaceModel
from ..quantum.ansatz import QcnnSpec

logger = logging.getLogger(__name__)

HISTORY_HEADER = ("phase", "run_id", "step", "metric", "value")
SCHEMA_VERSION = 1


def dumps(data: Any) -> str:
    """Canonical JSON: sorted keys, repr floats, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty CSV")
        return list(reader)


async def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        async with aiofiles.open(path, "r", encoding="utf-8") as f:
            data = json.loads(await f.read())
    except json.JSONDecodeError as e:
        raise DataError(f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise DataError(f"{path}: top level must be an object")
    return data


async def load_checkpoint(path: Union[str, Path]) -> Dict[str, Any]:
    """Checkpoint document with the run, interface model and QCNN layout restored."""
    data = await read_json(path)
    if "run" not in data:
        raise DataError(f"{path}: not a checkpoint")
    try:
        data["run"] = TrainRun.from_dict(data["run"])
        if "interface" in data:
            data["interface"] = InterfaceModel.from_dict(data["interface"])
        if "qcnn" in data:
            data["qcnn"] = QcnnSpec.from_dict(data["qcnn"])
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"{path}: malformed checkpoint: {e}") from e
    return data


class ArtifactStore:
    """Persistent storage for the artifacts of one command invocation."""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.checkpoint_dir = self.output_dir / "checkpoints"

        self.output_dir.mkdir(parents=True, exist_ok=True)

    async def _write(self, path: Path, text: str) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            async with aiofiles.open(path, "w", encoding="utf-8") as f:
                await f.write(text)
            logger.debug(f"Wrote {path}")
            return path
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise DataError(f"cannot write {path}: {e}") from e

    async def save_checkpoint(self, run: TrainRun, extra: Optional[Dict[str, Any]] = None) -> Path:
        """Save one run as ``checkpoints/<phase>_run<r>.json``."""
        data = {"schema_version": SCHEMA_VERSION, "run": run.to_dict()}
        if extra:
            data.update(extra)
        return await self._write(self.checkpoint_dir / f"{run.phase}_run{run.run_id}.json", dumps(data))

    async def write_history(self, runs: Sequence[TrainRun]) -> Path:
        rows = [entry.to_row(run.phase, run.run_id) for run in runs for entry in run.history]
        return await self._write(self.output_dir / "history.csv", csv_text(HISTORY_HEADER, rows))

    async def write_summary(self, summary: Dict[str, Any]) -> Path:
        return await self._write(self.output_dir / "summary.json",
                                 dumps({"schema_version": SCHEMA_VERSION, **summary}))

    async def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        return await self._write(self.output_dir / "dataset_manifest.json", dumps(manifest))

    async def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return await self._write(self.output_dir / name, csv_text(header, rows))

    async def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        return await self._write(self.output_dir / name, dumps(data))

    async def read_json(self, path: Union[str, Path]) -> Dict[str, Any]:
        return await read_json(path)
