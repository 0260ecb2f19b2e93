"""Evaluation and diversity schemas."""

from typing import List

from pydantic import BaseModel, ConfigDict, Field


class DiversityReport(BaseModel):
    """Prototype diversity of a model against a set of training latents.

    Attributes:
        psi_n: Neighbor diversity score.
        psi_c: Class diversity score.
        neighbor_of: Index of each prototype's nearest training latent.
        class_of: Label of each prototype's nearest training latent.
        neighbor_bin_sizes: Prototype count per distinct nearest neighbor.
        class_bin_sizes: Prototype count per class, for every class.
        t_neighbor: Number of distinct nearest neighbors.
        t_class: Number of classes holding at least one prototype.
    """

    model_config = ConfigDict(frozen=True)

    psi_n: float = Field(gt=0, le=1)
    psi_c: float = Field(gt=0, le=1)
    neighbor_of: List[int]
    class_of: List[int]
    neighbor_bin_sizes: List[int]
    class_bin_sizes: List[int]
    t_neighbor: int
    t_class: int


class EvalReport(BaseModel):
    """Classification quality on a labeled set.

    Attributes:
        accuracy: Fraction of correct predictions.
        confusion: ``K×K`` counts, rows are true classes, columns predictions.
        warnings: Problems noticed while evaluating (e.g. absent classes).
    """

    model_config = ConfigDict(frozen=True)

    accuracy: float = Field(ge=0, le=1)
    confusion: List[List[int]]
    warnings: List[str] = Field(default_factory=list)
