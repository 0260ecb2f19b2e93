"""``export-latent``: joint t-SNE map of a dataset and a model's prototypes."""

import argparse
from pathlib import Path

import numpy as np

from src.commands.common import DATASET_DIR, command_manifest, resolve
from src.core.di import (
    get_checkpoint_repository,
    get_dataset_repository,
    get_run_repository,
)
from src.core.errors import ConfigurationError
from src.core.utils import get_logger
from src.ndgrad import value_of
from src.repositories.checkpoints import CheckpointRepository
from src.repositories.datasets import DatasetRepository
from src.repositories.runs import EMBEDDING, EMBEDDING_MANIFEST, RunRepository
from src.schemas.cli import CliConfig
from src.services.diversity import nearest_neighbors
from src.services.latentmap import embedding_frame, latent_map, project_view
from src.services.protomodel import encode

logger = get_logger()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Register ``export-latent`` flags."""
    parser.add_argument("--dataset", type=Path, help="dataset directory")
    parser.add_argument("--checkpoint", type=Path, help="model checkpoint")


def run(
    args: argparse.Namespace,
    config: CliConfig,
    datasets: DatasetRepository = get_dataset_repository(),
    checkpoints: CheckpointRepository = get_checkpoint_repository(),
    runs: RunRepository = get_run_repository(),
) -> int:
    """Encode the dataset, append the prototypes and write ``embedding.csv``.

    ``embedding.json`` next to it records the resolved config and input hashes.

    Args:
        args: Parsed command line.
        config: Resolved configuration; ``config.latent`` drives the map.
        datasets: Dataset repository instance.
        checkpoints: Checkpoint repository instance.
        runs: Run repository instance.

    Returns:
        int: Exit code.

    Raises:
        ConfigurationError: Without ``--checkpoint``.
        InputValidationError: With fewer than five points.
    """
    if args.checkpoint is None:
        raise ConfigurationError("export-latent: --checkpoint is required")
    out = Path(config.output_dir)
    checkpoint = checkpoints.load(resolve(out, args.checkpoint, ""))
    model = checkpoint.model
    stored = datasets.load(resolve(out, args.dataset, DATASET_DIR))

    latents = np.asarray(value_of(encode(model, stored.dataset.images)))
    prototypes = model.prototypes.numpy()
    embedding, _ = latent_map(latents, prototypes, config.latent)
    neighbor_of = nearest_neighbors(prototypes, latents)
    view = project_view(embedding, prototypes.shape[0], neighbor_of.tolist())
    frame = embedding_frame(embedding, view, stored.dataset.labels)
    path = runs.save_embedding(out, frame)
    manifest = command_manifest(
        "export-latent",
        config,
        {"dataset": stored.content_hash, "checkpoint": checkpoint.digest},
        [EMBEDDING],
    )
    runs.save_manifest(out / EMBEDDING_MANIFEST, manifest)
    logger.info(
        "wrote %s rows to %s (final KL %.4f)",
        len(frame),
        path,
        embedding.kl_trace[-1],
    )
    return 0
