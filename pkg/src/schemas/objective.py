"""Objective schemas."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat


class PdlVariant(str, Enum):
    """Form of the logarithm inside the prototype diversity penalty."""

    SHIFTED = "shifted"
    LITERAL = "literal"


class LossWeights(BaseModel):
    """Weights of the five-term objective.

    Attributes:
        lambda_r: Reconstruction weight.
        lambda_1: Weight of the prototype-to-latent pull.
        lambda_2: Weight of the latent-to-prototype pull.
        lambda_pd: Prototype diversity penalty weight.
        epsilon: Stabilizer added to the penalty's denominator.
        pdl_variant: ``shifted`` uses ``log(1 + d)``, ``literal`` uses ``log(d)``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda_r: NonNegativeFloat = 1.0
    lambda_1: NonNegativeFloat = 1.0
    lambda_2: NonNegativeFloat = 1.0
    lambda_pd: NonNegativeFloat = 0.0
    epsilon: PositiveFloat = 1e-6
    pdl_variant: PdlVariant = PdlVariant.SHIFTED


class LossBreakdown(BaseModel):
    """Value of every objective term and the weighted total.

    Attributes:
        e: Cross-entropy classification loss.
        r: Per-pixel mean squared reconstruction error.
        r1: Mean prototype-to-nearest-latent squared distance.
        r2: Mean latent-to-nearest-prototype squared distance.
        pdl: Prototype diversity penalty (reported even when its weight is 0).
        total: ``e + lambda_r*r + lambda_1*r1 + lambda_2*r2 + lambda_pd*pdl``.
    """

    model_config = ConfigDict(frozen=True)

    e: float = Field(ge=0)
    r: float = Field(ge=0)
    r1: float = Field(ge=0)
    r2: float = Field(ge=0)
    pdl: float
    total: float
