"""Prototype diversity scores and classification metrics.

Prototypes are grouped two ways: by the training example each one is nearest
to (neighbor grouping) and by that example's class (class grouping). A grouping
with bin sizes ``c_1..c_t`` scores ``sum(sqrt(c_i)) / sqrt(min(bins, m) * m)``,
which is 1 exactly when prototypes are spread as evenly as the bins allow.
"""

import math
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import DimensionError, InputValidationError
from src.core.utils import get_logger
from src.ndgrad import Operand, value_of
from src.schemas.metrics import DiversityReport, EvalReport
from src.services.protomodel import PrototypeModel, encode, predict

logger = get_logger()


def nearest_neighbors(prototypes: Operand, latents: Operand) -> np.ndarray:
    """Index of the nearest latent code for every prototype.

    Args:
        prototypes: ``m×q`` prototype matrix.
        latents: ``n×q`` training latents.

    Returns:
        np.ndarray: ``m`` indices into ``latents``; ties go to the lowest index.

    Raises:
        InputValidationError: If ``latents`` is empty.
        DimensionError: If the latent widths differ.
    """
    p = value_of(prototypes)
    z = np.asarray(value_of(latents), dtype=np.float64)
    if z.ndim != 2 or z.shape[0] == 0:
        raise InputValidationError("nearest_neighbors: needs at least one latent code")
    if p.ndim != 2 or p.shape[1] != z.shape[1]:
        raise DimensionError(
            f"nearest_neighbors: prototypes {list(p.shape)} vs latents {list(z.shape)}"
        )
    diff = p[:, None, :] - z[None, :, :]
    return np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)


def psi(bin_sizes: Sequence[int], m: int, bins: int) -> float:
    """Diversity score of a grouping of ``m`` prototypes.

    Args:
        bin_sizes: Prototype count per bin; empty bins may be included.
        m: Number of prototypes.
        bins: Number of available bins (``m`` for neighbors, ``K`` for classes).

    Returns:
        float: Score in ``(0, 1]``.

    Raises:
        InputValidationError: If a count is negative or counts do not sum to ``m``.
    """
    counts = np.asarray(bin_sizes, dtype=np.int64)
    if m < 1 or bins < 1:
        raise InputValidationError(f"psi: m={m} and bins={bins} must be positive")
    if np.any(counts < 0):
        raise InputValidationError(f"psi: negative bin size in {counts.tolist()}")
    if int(counts.sum()) != m:
        raise InputValidationError(
            f"psi: bin sizes {counts.tolist()} sum to {int(counts.sum())}, not {m}"
        )
    # fsum is correctly rounded, so the score ignores bin order
    total = math.fsum(np.sqrt(counts).tolist())
    return min(total / math.sqrt(min(bins, m) * m), 1.0)


def diversity_report(
    prototypes: Operand,
    latents: Operand,
    labels: ArrayLike,
    num_classes: int,
) -> DiversityReport:
    """Neighbor and class diversity of prototypes against training latents.

    Args:
        prototypes: ``m×q`` prototype matrix.
        latents: ``n×q`` training latents.
        labels: ``n`` training labels.
        num_classes: Number of classes ``K``.

    Returns:
        DiversityReport: Both scores with their groupings.
    """
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (value_of(latents).shape[0],):
        raise DimensionError(
            f"diversity: labels {list(y.shape)} vs latents "
            f"{list(value_of(latents).shape)}"
        )
    neighbor_of = nearest_neighbors(prototypes, latents)
    m = len(neighbor_of)
    _, neighbor_bins = np.unique(neighbor_of, return_counts=True)
    class_of = y[neighbor_of]
    class_bins = np.bincount(class_of, minlength=num_classes)
    return DiversityReport(
        psi_n=psi(neighbor_bins, m, m),
        psi_c=psi(class_bins, m, num_classes),
        neighbor_of=neighbor_of.tolist(),
        class_of=class_of.tolist(),
        neighbor_bin_sizes=neighbor_bins.tolist(),
        class_bin_sizes=class_bins.tolist(),
        t_neighbor=len(neighbor_bins),
        t_class=int(np.count_nonzero(class_bins)),
    )


def classification_report(
    predicted: ArrayLike, truth: ArrayLike, num_classes: int
) -> EvalReport:
    """Accuracy and confusion matrix of predictions.

    Raises:
        InputValidationError: If there are no examples.
        DimensionError: If predictions and truth differ in length.
    """
    y_hat = np.asarray(predicted, dtype=np.int64)
    y = np.asarray(truth, dtype=np.int64)
    if y.size == 0:
        raise InputValidationError("evaluate: empty test set")
    if y_hat.shape != y.shape:
        raise DimensionError(
            f"evaluate: predictions {list(y_hat.shape)} vs labels {list(y.shape)}"
        )
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(confusion, (y, y_hat), 1)
    warnings = [
        f"class {k} absent from test set"
        for k in range(num_classes)
        if confusion[k].sum() == 0
    ]
    for warning in warnings:
        logger.warning("evaluate: %s", warning)
    return EvalReport(
        accuracy=float(np.trace(confusion)) / y.size,
        confusion=confusion.tolist(),
        warnings=warnings,
    )


def evaluate(
    model: PrototypeModel,
    test_images: Operand,
    test_labels: ArrayLike,
    train_images: Operand,
    train_labels: ArrayLike,
    train_latents: Optional[Operand] = None,
) -> tuple[EvalReport, DiversityReport]:
    """Evaluate a model on a test set and its prototypes against training data.

    Args:
        model: Trained model.
        test_images: ``n_test×p`` held-out pixels.
        test_labels: Held-out labels.
        train_images: ``n_train×p`` training pixels.
        train_labels: Training labels.
        train_latents: Precomputed training latents, if already available.

    Returns:
        tuple[EvalReport, DiversityReport]: Classification and diversity reports.
    """
    report = classification_report(
        predict(model, test_images), test_labels, model.config.num_classes
    )
    latents = train_latents
    if latents is None:
        latents = encode(model, train_images)
    diversity = diversity_report(
        model.prototypes, latents, train_labels, model.config.num_classes
    )
    return report, diversity
