"""Pytest configuration and fixtures for all tests.

This module contains pytest fixtures that can be used across all tests.
This module is automatically loaded by pytest and fixtures defined here
are available to all test files.
"""

from typing import Generator

import numpy as np
import pytest

from src.schemas.model import ModelConfig
from src.services.dataset import ImageDataset
from src.services.protomodel import PrototypeModel, init


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data.

    Returns:
        np.random.Generator: Generator with a fixed seed.
    """
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> ModelConfig:
    """Model extents small enough for finite-difference checks.

    Returns:
        ModelConfig: p=64, q=8, m=4, K=3 with narrow hidden layers.
    """
    return ModelConfig(
        input_dim=64,
        latent_dim=8,
        num_prototypes=4,
        num_classes=3,
        hidden_sizes=(16, 12, 10),
        seed=7,
    )


@pytest.fixture
def tiny_model(tiny_config: ModelConfig) -> PrototypeModel:
    """Freshly initialized tiny model."""
    return init(tiny_config)


@pytest.fixture
def tiny_batch(
    rng: np.random.Generator,
) -> Generator[tuple[np.ndarray, np.ndarray], None, None]:
    """Sixteen random images with labels covering every class.

    Yields:
        tuple[np.ndarray, np.ndarray]: ``16×64`` pixels and ``16`` labels.
    """
    images = rng.uniform(0.0, 1.0, size=(16, 64))
    labels = np.arange(16) % 3
    yield images, labels


@pytest.fixture
def toy_dataset() -> ImageDataset:
    """Forty-five 8×8 images whose class is the lit row band."""
    rng = np.random.default_rng(21)
    labels = np.repeat(np.arange(3), 15)
    images = rng.uniform(0.0, 0.2, size=(45, 8, 8))
    for i, label in enumerate(labels):
        images[i, 2 * label : 2 * label + 3, :] = 0.9
    return ImageDataset(
        images=images.reshape(45, 64),
        labels=labels,
        ids=[f"img_{i:05d}" for i in range(45)],
        height=8,
        width=8,
    )
