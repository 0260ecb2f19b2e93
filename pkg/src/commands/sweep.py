"""``sweep``: train every (penalty weight, seed) cell and summarize."""

import argparse
from pathlib import Path

from src.commands.common import DATASET_DIR, RUNS_DIR, command_manifest, resolve
from src.commands.train import train_cell
from src.core.di import get_dataset_repository, get_run_repository
from src.core.errors import ConfigurationError
from src.core.utils import get_logger
from src.repositories.datasets import DatasetRepository
from src.repositories.runs import SWEEP_MANIFEST, SWEEP_TABLE, RunRepository
from src.schemas.cli import CliConfig
from src.schemas.training import RunRecord, TrainConfig
from src.services.sweep import run_sweep

logger = get_logger()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Register ``sweep`` flags."""
    parser.add_argument("--dataset", type=Path, help="dataset directory")
    parser.add_argument("--seeds", type=int, nargs="+", help="seeds of every weight")


def run(
    args: argparse.Namespace,
    config: CliConfig,
    datasets: DatasetRepository = get_dataset_repository(),
    runs: RunRepository = get_run_repository(),
) -> int:
    """Run the penalty-weight sweep and write ``<out>/table.csv``.

    ``<out>/sweep.json`` records the resolved config, the dataset hash and the
    run directory of every cell.

    Aborted cells keep their run directories and mark their row incomplete.

    Args:
        args: Parsed command line.
        config: Resolved configuration.
        datasets: Dataset repository instance.
        runs: Run repository instance.

    Returns:
        int: Exit code.

    Raises:
        ConfigurationError: With fewer than two seeds.
    """
    out = Path(config.output_dir)
    train_config = config.train
    if args.seeds:
        train_config = train_config.model_copy(update={"seeds": list(args.seeds)})
    if len(train_config.seeds) < 2:
        raise ConfigurationError("sweep: needs at least two seeds")
    stored = datasets.load(resolve(out, args.dataset, DATASET_DIR))

    def runner(cell: TrainConfig) -> RunRecord:
        return train_cell(stored, cell, out, args.force, runs, resolved=config)

    rows, records = run_sweep(train_config, runner)
    path = runs.save_table(out, rows)
    resolved = config.model_copy(update={"train": train_config})
    artifacts = [SWEEP_TABLE, *(f"{RUNS_DIR}/{r.run_id}" for r in records)]
    manifest = command_manifest(
        "sweep", resolved, {"dataset": stored.content_hash}, artifacts
    )
    runs.save_manifest(out / SWEEP_MANIFEST, manifest)
    for row in rows:
        logger.info(
            "lambda_pd %g: accuracy %s psi_n %s psi_c %s%s",
            row.lambda_pd,
            _fmt(row.accuracy_mean, row.accuracy_std),
            _fmt(row.psi_n_mean, row.psi_n_std),
            _fmt(row.psi_c_mean, row.psi_c_std),
            "" if row.complete else " (incomplete)",
        )
    logger.info("wrote %s", path)
    return 0


def _fmt(mean: object, std: object) -> str:
    if mean is None:
        return "n/a"
    return f"{mean:.3f}" if std is None else f"{mean:.3f}±{std:.3f}"
