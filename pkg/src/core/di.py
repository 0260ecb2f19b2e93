"""Dependency injection configuration module."""

from functools import lru_cache

from src.repositories.checkpoints import (
    BinaryCheckpointRepository,
    CheckpointRepository,
)
from src.repositories.datasets import DatasetRepository, PgmDatasetRepository
from src.repositories.images import ImageRepository, PgmImageRepository
from src.repositories.runs import FileRunRepository, RunRepository


@lru_cache()
def get_image_repository() -> ImageRepository:
    """Get the image repository instance.

    Returns:
        ImageRepository: The image repository instance.
    """
    return PgmImageRepository()


@lru_cache()
def get_checkpoint_repository() -> CheckpointRepository:
    """Get the checkpoint repository instance.

    Returns:
        CheckpointRepository: The checkpoint repository instance.
    """
    return BinaryCheckpointRepository()


@lru_cache()
def get_dataset_repository() -> DatasetRepository:
    """Get the dataset repository instance.

    Returns:
        DatasetRepository: The dataset repository instance.
    """
    return PgmDatasetRepository(get_image_repository())


@lru_cache()
def get_run_repository() -> RunRepository:
    """Get the run repository instance.

    Returns:
        RunRepository: The run repository instance.
    """
    return FileRunRepository(get_image_repository(), get_checkpoint_repository())
