"""Training, run and sweep schemas."""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
)

from src.schemas.model import ModelConfig
from src.schemas.objective import LossBreakdown, LossWeights


class TrainConfig(BaseModel):
    """Optimization protocol.

    Attributes:
        learning_rate: Adam step size.
        batch_size: Examples per step (100 for ECG, 125 for respiration).
        epochs: Number of passes over the training split.
        num_prototypes: Prototype count ``m``.
        latent_dim: Latent dimension ``q``.
        hidden_sizes: Encoder hidden widths.
        loss: Objective weights.
        lambda_pd_sweep: Penalty weights visited by a sweep.
        seeds: Master seeds visited by a sweep.
        seed: Master seed of a single run.
        snapshot_epochs: Epochs whose decoded prototypes are exported; the final
            epoch is always added.
        split: Training share of the stratified train/test split.
        selection: Split used for best-epoch selection.
        validation_fraction: Share of the training split held out when
            ``selection`` is ``validation``.
        autoencoder_only: Train the reconstruction term alone.
        adam_beta1: First-moment decay.
        adam_beta2: Second-moment decay.
        adam_epsilon: Adam denominator stabilizer.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: PositiveFloat = 0.002
    batch_size: PositiveInt = 100
    epochs: PositiveInt = 100
    num_prototypes: PositiveInt = 10
    latent_dim: PositiveInt = 64
    hidden_sizes: Tuple[PositiveInt, PositiveInt, PositiveInt] = (512, 256, 128)
    loss: LossWeights = Field(default_factory=LossWeights)
    lambda_pd_sweep: List[NonNegativeFloat] = Field(
        default_factory=lambda: [0.0, 500.0, 1000.0, 2000.0]
    )
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    seed: int = Field(default=0, ge=0)
    snapshot_epochs: List[int] = Field(default_factory=lambda: [0, 20, 100])
    split: float = Field(default=0.8, gt=0, lt=1)
    selection: Literal["test", "validation"] = "test"
    validation_fraction: float = Field(default=0.1, gt=0, lt=1)
    autoencoder_only: bool = False
    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_epsilon: PositiveFloat = 1e-8


class EpochMetrics(BaseModel):
    """One row of ``metrics.csv``.

    Attributes:
        epoch: Epoch index; 0 is the freshly initialized model.
        train: Objective on the whole training split after the epoch.
        train_accuracy: Accuracy on the training split.
        test_accuracy: Accuracy on the held-out split.
        selection_accuracy: Accuracy on the split used for best-epoch selection.
        psi_n: Neighbor diversity against training latents.
        psi_c: Class diversity against training latents.
    """

    model_config = ConfigDict(frozen=True)

    epoch: int
    train: LossBreakdown
    train_accuracy: float
    test_accuracy: float
    selection_accuracy: float
    psi_n: float
    psi_c: float


class RunManifest(BaseModel):
    """Everything needed to reproduce a run.

    Attributes:
        run_id: Directory name of the run.
        tool_version: Version of the package that produced it.
        config: Fully resolved training config.
        dataset_hash: Content hash of the dataset.
        seed: Master seed of the run.
        model: Resolved model extents and initialization seed.
    """

    run_id: str
    tool_version: str
    config: TrainConfig
    dataset_hash: str
    seed: int
    model: ModelConfig


class RunRecord(BaseModel):
    """Result of one training run.

    Attributes:
        run_id: Directory name of the run.
        epochs: Metrics per epoch, append-only.
        best_epoch: Epoch with the highest selection accuracy (earliest on ties).
        checkpoints: Paths of written checkpoints by role.
        manifest: Reproduction manifest.
        aborted: Reason the run stopped early, if it did.
    """

    run_id: str
    epochs: List[EpochMetrics]
    best_epoch: int
    checkpoints: Dict[str, str] = Field(default_factory=dict)
    manifest: RunManifest
    aborted: Optional[str] = None

    @property
    def best(self) -> EpochMetrics:
        """Metrics of the best epoch."""
        return next(m for m in self.epochs if m.epoch == self.best_epoch)


class SweepRow(BaseModel):
    """Aggregate of best-epoch metrics over seeds for one penalty weight.

    Attributes:
        lambda_pd: Penalty weight.
        runs: Runs attempted.
        completed: Runs that finished.
        complete: Whether every run finished.
        accuracy_mean: Mean best-epoch test accuracy.
        accuracy_std: Sample standard deviation of the accuracy.
        psi_n_mean: Mean best-epoch neighbor diversity.
        psi_n_std: Its sample standard deviation.
        psi_c_mean: Mean best-epoch class diversity.
        psi_c_std: Its sample standard deviation.
    """

    lambda_pd: float
    runs: int
    completed: int
    complete: bool
    accuracy_mean: Optional[float]
    accuracy_std: Optional[float]
    psi_n_mean: Optional[float]
    psi_n_std: Optional[float]
    psi_c_mean: Optional[float]
    psi_c_std: Optional[float]
