"""Five-term training objective.

``total = E + lambda_r*R + lambda_1*R1 + lambda_2*R2 + lambda_pd*PDL`` where E is
the cross entropy of the prototype classifier, R the per-pixel reconstruction
error, R1/R2 pull prototypes and latents towards each other and PDL penalizes
prototypes that crowd together in latent space.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import ConfigurationError, DimensionError, InputValidationError
from src.ndgrad import (
    Operand,
    add,
    add_scalar,
    clamp_min,
    log,
    mean_all,
    min_reduce,
    pairwise_sq_dist,
    reciprocal,
    scale,
    softmax_cross_entropy,
    square,
    sub,
    value_of,
)
from src.schemas.objective import LossBreakdown, LossWeights, PdlVariant
from src.services.protomodel import (
    PROTOTYPES,
    ParamView,
    PrototypeModel,
    decode,
    encode,
    logits_from_latents,
)

LITERAL_DENOMINATOR_FLOOR = 1e-3
_LOG_ARGUMENT_FLOOR = 1e-300


def mean_nearest_prototype_distance(prototypes: Operand) -> Operand:
    """Mean over prototypes of the squared distance to the nearest other one."""
    m = value_of(prototypes).shape[0]
    distances = pairwise_sq_dist(prototypes, prototypes)
    return mean_all(min_reduce(distances, axis=1, exclude=np.eye(m, dtype=bool)))


def pdl(
    prototypes: Operand,
    epsilon: float = 1e-6,
    variant: PdlVariant = PdlVariant.SHIFTED,
) -> Operand:
    """Prototype diversity penalty.

    With ``d`` the mean nearest-other-prototype squared distance, the shifted
    variant is ``1 / (log(1 + d) + epsilon)``; the literal variant is
    ``1 / (log(d) + epsilon)`` with the denominator clamped below at 1e-3.

    Raises:
        ConfigurationError: If there are fewer than two prototypes.
    """
    if value_of(prototypes).shape[0] < 2:
        raise ConfigurationError("pdl: needs at least two prototypes")
    d = mean_nearest_prototype_distance(prototypes)
    if variant is PdlVariant.SHIFTED:
        denominator = add_scalar(log(add_scalar(d, 1.0)), epsilon)
    else:
        logged = log(clamp_min(d, _LOG_ARGUMENT_FLOOR))
        denominator = clamp_min(add_scalar(logged, epsilon), LITERAL_DENOMINATOR_FLOOR)
    return reciprocal(denominator)


def _check_pair(prototypes: Operand, latents: Operand, what: str) -> None:
    p_shape = value_of(prototypes).shape
    z_shape = value_of(latents).shape
    if len(z_shape) != 2 or z_shape[0] < 1:
        raise InputValidationError(f"{what}: needs at least one latent code")
    if len(p_shape) != 2 or p_shape[1] != z_shape[1]:
        raise DimensionError(
            f"{what}: prototypes {list(p_shape)} vs latents {list(z_shape)}"
        )


def r1(prototypes: Operand, latents: Operand) -> Operand:
    """Mean over prototypes of the squared distance to the nearest latent."""
    _check_pair(prototypes, latents, "r1")
    return mean_all(min_reduce(pairwise_sq_dist(prototypes, latents), axis=1))


def r2(prototypes: Operand, latents: Operand) -> Operand:
    """Mean over latents of the squared distance to the nearest prototype."""
    _check_pair(prototypes, latents, "r2")
    return mean_all(min_reduce(pairwise_sq_dist(latents, prototypes), axis=1))


def reconstruction_error(batch: Operand, reconstruction: Operand) -> Operand:
    """Squared reconstruction error averaged over the batch and the pixels.

    The per-example squared norm is divided by ``p`` so the term stays on the
    scale of the cross entropy whatever the image size; ``lambda_r = p``
    recovers the summed form.
    """
    return mean_all(square(sub(reconstruction, batch)))


def loss_terms(
    model: PrototypeModel,
    batch: Operand,
    labels: ArrayLike,
    weights: LossWeights,
    params: Optional[ParamView] = None,
) -> tuple[Operand, dict[str, Operand]]:
    """Build the objective graph.

    Args:
        model: Model providing extents and default parameters.
        batch: ``n×p`` pixels.
        labels: ``n`` class indices.
        weights: Term weights.
        params: Traced parameter view overriding ``model.params``.

    Returns:
        tuple[Operand, dict[str, Operand]]: Weighted total and each raw term.

    Raises:
        DimensionError: If the batch and labels are not aligned.
        ConfigurationError: If the penalty is weighted but undefined.
    """
    index = np.asarray(labels)
    if index.shape != (value_of(batch).shape[0],):
        raise DimensionError(
            f"labels {list(index.shape)} do not match "
            f"batch {list(value_of(batch).shape)}"
        )
    view = model.params if params is None else params
    latents = encode(model, batch, view)
    terms: dict[str, Operand] = {
        "e": softmax_cross_entropy(logits_from_latents(model, latents, view), index),
        "r": reconstruction_error(batch, decode(model, latents, view)),
        "r1": r1(view[PROTOTYPES], latents),
        "r2": r2(view[PROTOTYPES], latents),
    }
    if model.config.num_prototypes >= 2:
        terms["pdl"] = pdl(view[PROTOTYPES], weights.epsilon, weights.pdl_variant)
    elif weights.lambda_pd > 0:
        raise ConfigurationError("pdl: needs at least two prototypes")

    total = terms["e"]
    for name, weight in (
        ("r", weights.lambda_r),
        ("r1", weights.lambda_1),
        ("r2", weights.lambda_2),
        ("pdl", weights.lambda_pd),
    ):
        if weight != 0.0:
            total = add(total, scale(terms[name], weight))
    return total, terms


def breakdown(terms: dict[str, Operand], weights: LossWeights) -> LossBreakdown:
    """Collapse evaluated terms into a ``LossBreakdown``."""
    values = {name: float(value_of(term)) for name, term in terms.items()}
    values.setdefault("pdl", 0.0)
    total = (
        values["e"]
        + weights.lambda_r * values["r"]
        + weights.lambda_1 * values["r1"]
        + weights.lambda_2 * values["r2"]
        + weights.lambda_pd * values["pdl"]
    )
    return LossBreakdown(total=total, **values)


def total_loss(
    model: PrototypeModel,
    batch: Operand,
    labels: ArrayLike,
    weights: LossWeights,
) -> LossBreakdown:
    """Value of every objective term on a batch."""
    _, terms = loss_terms(model, batch, labels, weights)
    return breakdown(terms, weights)
