"""``eval``: score a checkpoint on the held-out split of its run."""

import argparse
import json
from pathlib import Path

from src.commands.common import DATASET_DIR, command_manifest, resolve
from src.core.di import (
    get_checkpoint_repository,
    get_dataset_repository,
    get_run_repository,
)
from src.core.errors import ConfigurationError
from src.core.utils import get_logger
from src.repositories.checkpoints import CheckpointRepository
from src.repositories.datasets import DatasetRepository
from src.repositories.runs import RunRepository
from src.schemas.cli import CliConfig
from src.services.diversity import evaluate
from src.services.trainer import stratified_split

logger = get_logger()

EVAL_DIR = "eval"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Register ``eval`` flags."""
    parser.add_argument("--dataset", type=Path, help="dataset directory")
    parser.add_argument("--checkpoint", type=Path, help="model checkpoint")


def run(
    args: argparse.Namespace,
    config: CliConfig,
    datasets: DatasetRepository = get_dataset_repository(),
    checkpoints: CheckpointRepository = get_checkpoint_repository(),
    runs: RunRepository = get_run_repository(),
) -> int:
    """Evaluate a checkpoint.

    The split is rebuilt from the run manifest next to the checkpoint, or from
    ``config.train`` when there is none, so a run's best checkpoint reproduces
    its best-epoch test accuracy. The report goes to
    ``<out>/eval/<run id>_<checkpoint>.json`` together with the resolved config
    and input hashes, and a summary line to stdout.

    Args:
        args: Parsed command line.
        config: Resolved configuration.
        datasets: Dataset repository instance.
        checkpoints: Checkpoint repository instance.
        runs: Run repository instance.

    Returns:
        int: Exit code.

    Raises:
        ConfigurationError: Without ``--checkpoint``.
    """
    if args.checkpoint is None:
        raise ConfigurationError("eval: --checkpoint is required")
    out = Path(config.output_dir)
    path = resolve(out, args.checkpoint, "")
    checkpoint = checkpoints.load(path)
    model = checkpoint.model
    stored = datasets.load(resolve(out, args.dataset, DATASET_DIR))

    train_config, run_id = config.train, path.parent.name
    run_manifest = runs.load_manifest(path.parent)
    if run_manifest is not None:
        train_config, run_id = run_manifest.config, run_manifest.run_id
        if run_manifest.dataset_hash != stored.content_hash:
            logger.warning("eval: dataset differs from the one %s used", run_id)
    train_idx, test_idx = stratified_split(
        stored.dataset.labels, train_config.split, train_config.seed
    )
    train_set = stored.dataset.subset(train_idx)
    test_set = stored.dataset.subset(test_idx)
    report, diversity = evaluate(
        model, test_set.images, test_set.labels, train_set.images, train_set.labels
    )

    manifest = command_manifest(
        "eval",
        config.model_copy(update={"train": train_config}),
        {"dataset": stored.content_hash, "checkpoint": checkpoint.digest},
    )
    target = runs.save_report(
        out / EVAL_DIR / f"{run_id}_{path.stem}.json",
        {
            "checkpoint": path.as_posix(),
            "manifest": manifest.model_dump(mode="json"),
            "evaluation": report.model_dump(mode="json"),
            "diversity": diversity.model_dump(mode="json"),
        },
    )
    summary = {
        "accuracy": report.accuracy,
        "psi_n": diversity.psi_n,
        "psi_c": diversity.psi_c,
    }
    print(json.dumps(summary, sort_keys=True))
    logger.info("wrote %s", target)
    return 0
