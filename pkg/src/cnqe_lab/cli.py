"""
Command-line interface for cnqe-lab.
"""

import asyncio
import functools
import itertools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .backends import create_router
from .core.config import ExperimentConfig, create_default_config, load_config, parse_config
from .core.errors import CnqeError, ConfigError, DataError
from .core.rng import RngFactory, make_stream
from .core.runs import TrainRun
from .data.loaders import dataset_manifest, load_dataset, pack_arrays
from .nn.baselines import HEAD_KINDS, BaselineHead
from .nn.interface import count_params, table_counts
from .quantum.embeddings import FeatureMapKind
from .quantum.fourier import check_reconstruction, reference_layouts, spectrum_of_embedding
from .services import reports
from .services.storage import HISTORY_HEADER, ArtifactStore, load_checkpoint, read_csv, read_json
from .training.baseline import autoencoder_pipeline, head_train_runs
from .training.cnqe import ExperimentSetup, cnqe_train, frozen_weights, select_median_run
from .training.qcnn import qcnn_spec_for, qcnn_train_runs

logger = logging.getLogger("cnqe_lab")
console = Console(stderr=True)


def setup_logging(output_dir: Optional[Path] = None, verbose: bool = False) -> None:
    """Rich console handler plus a timestamped ``run.log`` in the output directory."""
    root = logging.getLogger("cnqe_lab")
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.addHandler(RichHandler(console=console, show_time=False, show_path=False))
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(output_dir / "run.log", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(file_handler)


def handle_errors(command: Callable) -> Callable:
    """Report failures as a JSON error object and exit with the carried code."""
    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        try:
            command(*args, **kwargs)
        except CnqeError as e:
            logger.error(f"{type(e).__name__}: {e}")
            click.echo(json.dumps(e.to_dict()))
            sys.exit(e.exit_code)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception as e:
            logger.exception(f"Unexpected failure: {e}")
            click.echo(json.dumps({"error": {"type": type(e).__name__, "message": str(e)}, "exit_code": 4}))
            sys.exit(4)

    return wrapper


def _load(config_path: str, seed: Optional[int], out: Optional[str]) -> ExperimentConfig:
    return load_config(config_path).with_overrides(seed=seed, output_dir=out)


def _require(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"input not found: {p}")
    return p


def _checkpoint_extra(setup: ExperimentSetup, qcnn=None) -> Dict[str, Any]:
    extra: Dict[str, Any] = {
        "interface": setup.model.to_dict(),
        "feature_map": setup.spec.kind.value,
        "n_qubits": setup.spec.n_qubits,
    }
    if qcnn is not None:
        extra["qcnn"] = qcnn.to_dict()
    return extra


async def _persist(store: ArtifactStore, runs: Sequence[TrainRun], summary: Dict[str, Any],
                   manifest: Dict[str, Any], extra: Dict[str, Any]) -> None:
    for run in runs:
        await store.save_checkpoint(run, extra)
    await store.write_history(runs)
    await store.write_manifest(manifest)
    await store.write_summary(summary)


def run_train(config: ExperimentConfig, threads: int = 1) -> Tuple[Dict[str, Any], List[TrainRun]]:
    """The full pipeline: embedding runs, median selection, classifier runs, artifacts."""
    store = ArtifactStore(config.output_dir)
    split = load_dataset(config.dataset)
    setup = ExperimentSetup.from_config(config.train, create_router(config.noise))
    rngs = RngFactory(config.train.seed)
    logger.info(f"Training {config.train.interface} + {setup.spec.kind.value} ({config.train.loss_kind}) "
                f"on {split.source}: sizes={split.sizes}")

    cnqe_runs = cnqe_train(config.train, split, setup, rngs, threads)
    selected = select_median_run(cnqe_runs)
    qcnn = qcnn_spec_for(config.train, config.qcnn)
    qcnn_runs = qcnn_train_runs(config.train, split, setup, frozen_weights(selected), rngs, qcnn, threads=threads)

    summary = reports.train_summary(config, cnqe_runs, selected, qcnn_runs)
    runs = list(cnqe_runs) + list(qcnn_runs)
    asyncio.run(_persist(store, runs, summary, dataset_manifest(split, config.dataset),
                         _checkpoint_extra(setup, qcnn)))
    logger.info(f"trace_distance={summary['trace_distance']:.4f} accuracy={summary['accuracy']:.4f}")
    return summary, list(cnqe_runs)


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.pass_context
def main(ctx: click.Context, verbose: bool):
    """cnqe-lab - convolutional neural quantum embedding experiments."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    setup_logging(verbose=verbose)


@main.command()
@click.option("--config", "config_path", default="cnqe.json", show_default=True, help="Config file to create")
@handle_errors
def init(config_path: str):
    """Write a runnable synthetic-blobs configuration."""
    config_file = Path(config_path)
    if config_file.exists():
        click.echo(f"Configuration already exists at {config_file}")
        return
    create_default_config(config_file)
    click.echo(f"Created configuration at {config_file}")


def _common(command: Callable) -> Callable:
    command = click.option("--threads", default=1, show_default=True, type=click.IntRange(min=1),
                           help="Parallel runs")(command)
    command = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), help="Override train.seed")(command)
    command = click.option("--out", help="Override output_dir")(command)
    return click.option("--config", "config_path", required=True, help="JSON or TOML config")(command)


@main.command()
@_common
@click.pass_context
@handle_errors
def train(ctx: click.Context, config_path: str, out: Optional[str], seed: Optional[int], threads: int):
    """Train the embedding, select the median run and train the QCNN on it."""
    config = _load(config_path, seed, out)
    setup_logging(Path(config.output_dir), ctx.obj.get("verbose", False))
    summary, _ = run_train(config, threads)
    click.echo(json.dumps({"trace_distance": summary["trace_distance"], "accuracy": summary["accuracy"],
                           "output_dir": config.output_dir}))


@main.command()
@_common
@click.pass_context
@handle_errors
def baseline(ctx: click.Context, config_path: str, out: Optional[str], seed: Optional[int], threads: int):
    """Classical head on the trained embedding, or the autoencoder + QCNN pipeline."""
    config = _load(config_path, seed, out)
    if config.baseline is None:
        raise ConfigError("the baseline command needs a 'baseline' block")
    setup_logging(Path(config.output_dir), ctx.obj.get("verbose", False))
    store = ArtifactStore(config.output_dir)
    split = load_dataset(config.dataset)
    setup = ExperimentSetup.from_config(config.train, create_router(config.noise))
    rngs = RngFactory(config.train.seed)
    manifest = dataset_manifest(split, config.dataset)

    if config.baseline.kind == "autoencoder":
        qcnn = qcnn_spec_for(config.train, config.qcnn)
        ae_run, qcnn_runs = autoencoder_pipeline(config.train, config.baseline, split, setup, rngs, qcnn)
        summary = reports.autoencoder_summary(config, ae_run, qcnn_runs)
        runs = [ae_run] + qcnn_runs
        extra = _checkpoint_extra(setup, qcnn)
    else:
        cnqe_runs = cnqe_train(config.train, split, setup, rngs, threads)
        selected = select_median_run(cnqe_runs)
        head_runs = head_train_runs(config.train, config.baseline, split, setup, frozen_weights(selected), rngs)
        summary = reports.baseline_summary(config, selected, head_runs)
        runs = list(cnqe_runs) + head_runs
        extra = _checkpoint_extra(setup)
    asyncio.run(_persist(store, runs, summary, manifest, extra))
    click.echo(json.dumps({"accuracy": summary["accuracy"], "trace_distance": summary["trace_distance"],
                           "output_dir": config.output_dir}))


def _stats_records(path: Path) -> List[Dict[str, Any]]:
    rows = read_csv(path)
    if rows and set(HISTORY_HEADER) <= set(rows[0]):
        summary = asyncio.run(read_json(_require(str(path.parent / "summary.json"))))
        return reports.records_from_history(rows, summary)
    return reports.records_from_rows(rows)


@main.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out", help="Output directory (default: next to the first input)")
@handle_errors
def stats(inputs: Tuple[str, ...], out: Optional[str]):
    """Per-component Welch tests with Bonferroni adjustment.

    Takes a sweep ``runs.csv`` or the ``history.csv`` files written by ``train``;
    each history is labelled by the ``summary.json`` next to it.
    """
    paths = [_require(p) for p in inputs]
    records: List[Dict[str, Any]] = []
    for path in paths:
        records += _stats_records(path)
    if not records:
        raise DataError(f"{', '.join(map(str, paths))}: no runs")
    level_rows, test_rows = reports.component_rows(records)
    store = ArtifactStore(out or paths[0].parent)

    async def write() -> None:
        await store.write_csv("stats_levels.csv", reports.LEVELS_HEADER, level_rows)
        await store.write_csv("stats.csv", reports.STATS_HEADER, test_rows)

    asyncio.run(write())
    click.echo(json.dumps({"comparisons": len(test_rows), "output_dir": str(store.output_dir)}))


@main.command()
@click.argument("arrays")
@click.argument("output")
@handle_errors
def pack(arrays: str, output: str):
    """Resize an .npz of image arrays to 3x32x32 and write a CNQE1 raw tensor file."""
    split = pack_arrays(_require(arrays), output)
    click.echo(json.dumps({"train": len(split.train), "test": len(split.test), "output": output}))


@main.command("fourier-check")
@click.option("--out", default="runs/fourier", show_default=True, help="Output directory")
@click.option("--seed", default=0, show_default=True, type=click.IntRange(min=0), help="Layout and input seed")
@click.option("--samples", default=50, show_default=True, type=click.IntRange(min=1), help="Random inputs per layout")
@click.option("--layout", "layout_name", help="Check one reference layout only")
@click.option("--n-qubits", default=4, show_default=True, type=click.IntRange(2, 10),
              help="Qubits for the feature-map spectrum table")
@handle_errors
def fourier_check(out: str, seed: int, samples: int, layout_name: Optional[str], n_qubits: int):
    """Check Fourier reconstructions against direct simulation and tabulate embedding spectra."""
    layouts = reference_layouts(make_stream(seed, "fourier/layouts"))
    if layout_name is not None:
        if layout_name not in layouts:
            raise ConfigError(f"unknown layout '{layout_name}' (choose from {', '.join(layouts)})")
        layouts = {layout_name: layouts[layout_name]}
    inputs = make_stream(seed, "fourier/inputs")
    checks, first_spectrum = [], None
    for name, layout in layouts.items():
        check, spectrum = check_reconstruction(name, layout, inputs, samples)
        checks.append(check)
        if first_spectrum is None:
            first_spectrum = spectrum
    summaries = [spectrum_of_embedding(kind, n_qubits) for kind in FeatureMapKind]
    store = ArtifactStore(out)

    async def write() -> None:
        await store.write_csv("fourier_check.csv", reports.FOURIER_CHECK_HEADER,
                              [reports.fourier_check_row(c) for c in checks])
        await store.write_csv("spectrum.csv", reports.SPECTRUM_HEADER, reports.spectrum_rows(first_spectrum))
        await store.write_csv("spectral_summary.csv", reports.SPECTRAL_SUMMARY_HEADER,
                              [reports.spectral_summary_row(s) for s in summaries])

    asyncio.run(write())
    worst = max(c.max_error for c in checks)
    click.echo(json.dumps({"layouts": len(checks), "max_error": worst, "output_dir": out}))


@main.command()
@click.option("--config", "config_path", help="Config to describe")
@click.option("--checkpoint", "checkpoint_path", help="Stored checkpoint to describe")
@handle_errors
def inspect(config_path: Optional[str], checkpoint_path: Optional[str]):
    """Parameter counts of a configuration or the contents of a checkpoint."""
    if not config_path and not checkpoint_path:
        raise ConfigError("give --config or --checkpoint")
    out = Console()
    if config_path:
        config = load_config(config_path)
        setup = ExperimentSetup.from_config(config.train, create_router(config.noise))
        cnn, fc = count_params(setup.model)
        closed = table_counts(setup.model.kind, setup.model.n_channels, setup.model.p_unit)
        qcnn = qcnn_spec_for(config.train, config.qcnn)
        table = Table(title=f"{setup.model.kind.value} + {setup.spec.kind.value}")
        table.add_column("Component")
        table.add_column("Parameters", justify="right")
        table.add_row("interface cnn", f"{cnn} (closed form {closed[0]})")
        table.add_row("interface fc", f"{fc} (closed form {closed[1]})")
        table.add_row("embedding features", str(setup.spec.n_features))
        table.add_row("embedding unit", str(setup.spec.unit_features))
        table.add_row("qcnn", str(qcnn.total_params))
        for kind in HEAD_KINDS:
            try:
                table.add_row(f"head {kind}", str(BaselineHead(kind, setup.model.out_dim).n_params))
            except ConfigError:
                table.add_row(f"head {kind}", "n/a")
        out.print(table)
    if checkpoint_path:
        data = asyncio.run(load_checkpoint(_require(checkpoint_path)))
        run: TrainRun = data["run"]
        table = Table(title=f"{run.phase} run {run.run_id}")
        table.add_column("Field")
        table.add_column("Value", justify="right")
        table.add_row("seed", str(run.seed))
        table.add_row("weights", str(len(run.weights)))
        table.add_row("best_step", str(run.best_step))
        for key, value in sorted(run.metrics.items()):
            table.add_row(key, f"{value:.6g}")
        for key in ("feature_map", "n_qubits"):
            if key in data:
                table.add_row(key, str(data[key]))
        out.print(table)


def _split_list(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


@main.command()
@_common
@click.option("--interfaces", default="GA", show_default=True, help="Comma-separated interfaces")
@click.option("--losses", default="fidelity,hs", show_default=True, help="Comma-separated loss kinds")
@click.option("--maps", "feature_maps", default="zz_unit,ncx_unit", show_default=True,
              help="Comma-separated feature maps")
@click.option("--margins", default="", help="Comma-separated blob margins (blobs datasets only)")
@click.pass_context
@handle_errors
def sweep(ctx: click.Context, config_path: str, out: Optional[str], seed: Optional[int], threads: int,
          interfaces: str, losses: str, feature_maps: str, margins: str):
    """Train every valid interface x loss x feature-map (x margin) combination."""
    base = _load(config_path, seed, out)
    root = Path(base.output_dir)
    setup_logging(root, ctx.obj.get("verbose", False))
    margin_values: List[Optional[float]] = [float(m) for m in _split_list(margins)] or [None]
    run_rows: List[List[Any]] = []
    points: List[Tuple[str, float, float]] = []

    for interface, loss_kind, fmap, margin in itertools.product(
            _split_list(interfaces), _split_list(losses), _split_list(feature_maps), margin_values):
        name = f"{interface}_{loss_kind}_{fmap}" + (f"_m{margin:g}" if margin is not None else "")
        data = base.model_dump(mode="json")
        data["train"].update({"interface": interface, "loss_kind": loss_kind, "feature_map": fmap})
        if margin is not None:
            data["dataset"]["margin_sigma"] = margin
        data["output_dir"] = str(root / name)
        try:
            config = parse_config(data)
        except ConfigError as e:
            logger.warning(f"Skipping {name}: {e}")
            continue
        summary, cnqe_runs = run_train(config, threads)
        points.append((name, summary["trace_distance"], summary["accuracy"]))
        margin_value = config.dataset.margin_sigma if config.dataset.source == "blobs" else ""
        for run in cnqe_runs:
            run_rows.append([name, config.train.interface, loss_kind, config.train.feature_map, margin_value,
                             run.run_id, run.metrics["trace_distance"], summary["accuracy"]])

    store = ArtifactStore(root)
    correlation = _correlation_or_none(points)

    async def write() -> None:
        await store.write_csv("runs.csv", reports.RUNS_HEADER, run_rows)
        await store.write_csv("sweep.csv", reports.POINTS_HEADER, points)
        if correlation is not None:
            await store.write_json("correlation.json", correlation)

    asyncio.run(write())
    click.echo(json.dumps({"configurations": len(points), "correlation": correlation, "output_dir": str(root)}))


def _correlation_or_none(points: Sequence[Tuple[str, float, float]]) -> Optional[Dict[str, Any]]:
    try:
        return reports.correlation_report(points)
    except CnqeError as e:
        logger.warning(f"No correlation summary: {e}")
        return None


@main.command()
@click.argument("summaries", nargs=-1, required=True)
@click.option("--out", default="runs/correlation", show_default=True, help="Output directory")
@handle_errors
def correlate(summaries: Tuple[str, ...], out: str):
    """Trace distance vs accuracy correlation across summary files."""
    store = ArtifactStore(out)
    points: List[Tuple[str, float, float]] = []
    for path in summaries:
        data = asyncio.run(store.read_json(_require(path)))
        try:
            points.append((str(Path(path).parent.name or path), float(data["trace_distance"]),
                           float(data["accuracy"])))
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"{path}: not a summary file ({e})") from e
    correlation = reports.correlation_report(points)

    async def write() -> None:
        await store.write_csv("points.csv", reports.POINTS_HEADER, points)
        await store.write_json("correlation.json", correlation)

    asyncio.run(write())
    click.echo(json.dumps(correlation))


if __name__ == "__main__":
    main()
