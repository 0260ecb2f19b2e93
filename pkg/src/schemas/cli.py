"""Command line configuration schemas."""

from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from src.schemas.signals import DatasetSpec
from src.schemas.training import TrainConfig


class LatentConfig(BaseModel):
    """Latent-space export settings.

    Attributes:
        pca_dim: Upper bound of the PCA target dimension.
        perplexity: t-SNE perplexity.
        iterations: t-SNE iterations.
        seed: t-SNE initialization seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    pca_dim: PositiveInt = 500
    perplexity: PositiveFloat = 30.0
    iterations: PositiveInt = 1000
    seed: int = Field(default=0, ge=0)


class CliConfig(BaseModel):
    """JSON document accepted by ``--config``.

    Attributes:
        dataset: Synthetic dataset request.
        train: Training protocol, including model extents.
        latent: Latent-space export settings.
        output_dir: Root that every command writes under.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    latent: LatentConfig = Field(default_factory=LatentConfig)
    output_dir: str = "out"


class CommandManifest(BaseModel):
    """Provenance written next to the artifacts of a command.

    Attributes:
        command: Subcommand name.
        tool_version: Version of the package that wrote the artifacts.
        config: Resolved configuration without the output root, so artifacts
            written under different roots carry identical manifests.
        inputs: Content hash of every input by role (``dataset``, ``checkpoint``).
        artifacts: Written files, relative to the output root.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    tool_version: str
    config: Dict[str, Any]
    inputs: Dict[str, str] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)
