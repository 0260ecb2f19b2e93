"""``train``: fit one model and write its run directory."""

import argparse
from pathlib import Path
from typing import Optional

from src.commands.common import DATASET_DIR, RUNS_DIR, command_manifest, resolve
from src.core.di import (
    get_checkpoint_repository,
    get_dataset_repository,
    get_run_repository,
)
from src.core.errors import ConfigurationError, TrainingAbortedError
from src.core.utils import get_logger
from src.repositories.checkpoints import CheckpointRepository
from src.repositories.datasets import DatasetRepository, StoredDataset
from src.repositories.runs import BEST_CHECKPOINT, METRICS, RunRepository
from src.schemas.cli import CliConfig
from src.schemas.training import RunRecord, TrainConfig
from src.services.trainer import run_id_for, train

logger = get_logger()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Register ``train`` flags."""
    parser.add_argument("--dataset", type=Path, help="dataset directory")
    parser.add_argument(
        "--resume", type=Path, help="checkpoint with training state to continue from"
    )


def train_cell(
    stored: StoredDataset,
    config: TrainConfig,
    out: Path,
    force: bool,
    runs: RunRepository,
    resume: Optional[Path] = None,
    resolved: Optional[CliConfig] = None,
    checkpoints: CheckpointRepository = get_checkpoint_repository(),
) -> RunRecord:
    """Train one configuration into ``<out>/runs/<run id>``.

    With ``resolved``, the run manifest also records the command configuration
    that reproduces this run, with ``config`` as its training section.

    Raises:
        ConfigurationError: If the resume checkpoint carries no training state.
    """
    run_dir = out / RUNS_DIR / run_id_for(config.loss.lambda_pd, config.seed)
    state = history = best = None
    inputs = {"dataset": stored.content_hash}
    if resume is not None:
        checkpoint = checkpoints.load(resume)
        inputs["resume"] = checkpoint.digest
        if checkpoint.state is None:
            raise ConfigurationError(f"{resume}: checkpoint has no training state")
        state = checkpoint.state
        if (resume.parent / METRICS).exists():
            history = runs.load_metrics(resume.parent)
        if (resume.parent / BEST_CHECKPOINT).exists():
            best = checkpoints.load(resume.parent / BEST_CHECKPOINT).model
    in_place = resume is not None and resume.parent.resolve() == run_dir.resolve()
    runs_dir = runs.prepare_run(run_dir, force or in_place)
    result = train(
        stored.dataset,
        config,
        dataset_hash=stored.content_hash,
        resume=state,
        history=history or (),
        resume_best=best,
    )
    invocation = None
    if resolved is not None:
        cell = resolved.model_copy(update={"train": config})
        invocation = command_manifest("train", cell, inputs)
    return runs.save_run(
        runs_dir, result, stored.dataset.height, stored.dataset.width, invocation
    )


def run(
    args: argparse.Namespace,
    config: CliConfig,
    datasets: DatasetRepository = get_dataset_repository(),
    runs: RunRepository = get_run_repository(),
) -> int:
    """Train with ``config.train`` on a generated dataset.

    Args:
        args: Parsed command line.
        config: Resolved configuration.
        datasets: Dataset repository instance.
        runs: Run repository instance.

    Returns:
        int: Exit code.

    Raises:
        TrainingAbortedError: If the loss or a gradient became non-finite; the
            run directory still holds the last good state.
    """
    out = Path(config.output_dir)
    stored = datasets.load(resolve(out, args.dataset, DATASET_DIR))
    resume = None
    if args.resume is not None:
        resume = args.resume if args.resume.is_absolute() else out / args.resume
    record = train_cell(
        stored, config.train, out, args.force, runs, resume, resolved=config
    )
    if record.aborted is not None:
        raise TrainingAbortedError(f"{record.run_id}: {record.aborted}")
    best = record.best
    logger.info(
        "%s: best epoch %s, test accuracy %.3f, psi_n %.3f, psi_c %.3f",
        record.run_id,
        record.best_epoch,
        best.test_accuracy,
        best.psi_n,
        best.psi_c,
    )
    return 0
