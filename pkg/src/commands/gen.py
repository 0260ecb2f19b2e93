"""``gen``: synthesize and render a labeled dataset."""

import argparse
from pathlib import Path

from src.commands.common import DATASET_DIR
from src.core.di import get_dataset_repository
from src.core.utils import get_logger
from src.repositories.datasets import DatasetRepository
from src.schemas.cli import CliConfig
from src.services.dataset import build_dataset

logger = get_logger()


def run(
    args: argparse.Namespace,
    config: CliConfig,
    repository: DatasetRepository = get_dataset_repository(),
) -> int:
    """Generate the dataset described by ``config.dataset``.

    Writes ``<out>/dataset/`` with ``images/*.pgm``, ``manifest.csv`` and
    ``dataset.json``; the same seed produces byte-identical files.

    Args:
        args: Parsed command line.
        config: Resolved configuration.
        repository: Dataset repository instance.

    Returns:
        int: Exit code.
    """
    root = Path(config.output_dir) / DATASET_DIR
    repository.prepare(root, args.force)
    dataset, records, _ = build_dataset(config.dataset)
    digest = repository.save(root, dataset, records, config.dataset, force=args.force)
    logger.info("wrote %s images to %s (hash %s)", len(dataset), root, digest)
    return 0
