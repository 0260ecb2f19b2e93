"""Model schemas."""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator


class ModelConfig(BaseModel):
    """Extents of an autoencoder-prototype model.

    Attributes:
        input_dim: Flattened image size ``p = H * W``.
        latent_dim: Latent dimension ``q``.
        num_prototypes: Prototype count ``m``.
        num_classes: Class count ``K``.
        hidden_sizes: Encoder hidden widths; the decoder mirrors them.
        seed: Initialization seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    input_dim: PositiveInt
    latent_dim: PositiveInt = 64
    num_prototypes: PositiveInt
    num_classes: PositiveInt
    hidden_sizes: Tuple[PositiveInt, PositiveInt, PositiveInt] = (512, 256, 128)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _enough_prototypes(self) -> "ModelConfig":
        if self.num_prototypes < self.num_classes:
            raise ValueError(
                f"num_prototypes ({self.num_prototypes}) must be at least "
                f"num_classes ({self.num_classes})"
            )
        return self
