"""Latent-space analysis.

Latent codes (with the prototypes appended) are reduced by PCA, compared by
cosine similarity and embedded in three dimensions with exact t-SNE run on the
distances ``1 - S``. The second and third embedding dimensions form the 2-D
view that is exported next to each prototype's nearest training example.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from src.core.errors import DimensionError, InputValidationError
from src.core.utils import get_logger
from src.schemas.cli import LatentConfig

logger = get_logger()

BINARY_SEARCH_TOLERANCE = 1e-5
BINARY_SEARCH_STEPS = 50
EXAGGERATION = 4.0
EXAGGERATION_ITERATIONS = 100
LEARNING_RATE = 100.0
MOMENTUM_SWITCH = 250
MIN_GAIN = 0.01
MIN_POINTS = 5


@dataclass(frozen=True)
class PcaResult:
    """Principal component projection.

    Attributes:
        components: ``d×q`` orthonormal rows, by decreasing variance.
        projected: ``n×d`` centered data in component coordinates.
        explained_variance: Variance along each component.
        retained_fraction: Share of the total variance kept by ``d`` components.
        mean: Column means removed before projecting.
    """

    components: np.ndarray
    projected: np.ndarray
    explained_variance: np.ndarray
    retained_fraction: float
    mean: np.ndarray


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional t-SNE embedding.

    Attributes:
        points: ``n×d_out`` coordinates.
        kl_trace: KL divergence before every step; the last entry is after the
            final step.
        perplexity: Perplexity actually used.
        iterations: Gradient steps taken.
        seed: Initialization seed.
    """

    points: np.ndarray
    kl_trace: list[float] = field(default_factory=list)
    perplexity: float = 30.0
    iterations: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class ProjectedView:
    """2-D view of an embedding with prototype markers.

    Attributes:
        coords: ``n×2`` embedding dimensions two and three.
        is_prototype: Whether each row is a prototype.
        nearest_neighbor: For prototype rows, the row of the nearest training
            example; ``-1`` for data rows.
    """

    coords: np.ndarray
    is_prototype: np.ndarray
    nearest_neighbor: np.ndarray


def _matrix(x: ArrayLike, what: str) -> np.ndarray:
    array = np.asarray(x, dtype=np.float64)
    if array.ndim != 2:
        raise DimensionError(
            f"{what}: expected a matrix, got shape {list(array.shape)}"
        )
    return array


def pca(x: ArrayLike, d: int) -> PcaResult:
    """Project centered data onto its ``d`` leading principal components.

    Component signs are fixed so the largest-magnitude loading is positive.

    Raises:
        InputValidationError: Unless ``1 <= d <= min(n - 1, q)``.
    """
    data = _matrix(x, "pca")
    n, q = data.shape
    if not 1 <= d <= min(n - 1, q):
        raise InputValidationError(f"pca: d={d} must lie in [1, {min(n - 1, q)}]")
    mean = data.mean(axis=0)
    centered = data - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    signs = np.sign(vt[np.arange(vt.shape[0]), np.argmax(np.abs(vt), axis=1)])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]
    energy = singular**2
    total = energy.sum()
    retained = float(energy[:d].sum() / total) if total > 0 else 1.0
    components = vt[:d]
    return PcaResult(
        components=components,
        projected=centered @ components.T,
        explained_variance=energy[:d] / max(n - 1, 1),
        retained_fraction=retained,
        mean=mean,
    )


def cosine_similarity(x: ArrayLike) -> np.ndarray:
    """Pairwise cosine similarity of rows.

    Rows of zero norm have similarity 0 to every other row. The result is
    symmetric with a unit diagonal.
    """
    data = _matrix(x, "cosine_similarity")
    norms = np.linalg.norm(data, axis=1)
    zero = norms == 0
    if np.any(zero):
        logger.warning(
            "cosine_similarity: %s zero rows, similarity set to 0", int(zero.sum())
        )
    unit = np.divide(
        data, norms[:, None], out=np.zeros_like(data), where=~zero[:, None]
    )
    similarity = np.clip(unit @ unit.T, -1.0, 1.0)
    similarity = (similarity + similarity.T) / 2.0
    np.fill_diagonal(similarity, 1.0)
    return similarity


def _conditional_row(distances: np.ndarray, log_perplexity: float) -> np.ndarray:
    shifted = distances - distances.min()
    beta, beta_min, beta_max = 1.0, -np.inf, np.inf
    for _ in range(BINARY_SEARCH_STEPS):
        weights = np.exp(-shifted * beta)
        total = weights.sum()
        probabilities = weights / total
        entropy = np.log(total) + beta * float(np.sum(shifted * probabilities))
        gap = entropy - log_perplexity
        if abs(gap) <= BINARY_SEARCH_TOLERANCE:
            break
        if gap > 0:
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
    return probabilities


def joint_probabilities(distances: ArrayLike, perplexity: float) -> np.ndarray:
    """Symmetrized t-SNE affinities from a distance matrix.

    Each row's Gaussian precision is found by binary search so that its
    conditional distribution has the requested perplexity; the result is
    ``(P + P.T) / (2n)``.

    Args:
        distances: ``n×n`` non-negative dissimilarities.
        perplexity: Target perplexity.

    Returns:
        np.ndarray: Symmetric, non-negative, zero-diagonal, sums to 1.
    """
    dist = _matrix(distances, "joint_probabilities")
    n = dist.shape[0]
    if dist.shape != (n, n) or n < 2:
        raise DimensionError(
            f"joint_probabilities: expected a square matrix, got {list(dist.shape)}"
        )
    if np.any(dist < 0):
        raise InputValidationError("joint_probabilities: negative distance")
    conditional = np.zeros((n, n))
    log_perplexity = np.log(perplexity)
    for i in range(n):
        others = np.arange(n) != i
        conditional[i, others] = _conditional_row(dist[i, others], log_perplexity)
    return (conditional + conditional.T) / (2.0 * n)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], 1e-300))))


def tsne(
    data: ArrayLike,
    d_out: int = 3,
    perplexity: float = 30.0,
    iterations: int = 1000,
    seed: int = 0,
    precomputed: bool = False,
) -> Embedding:
    """Exact t-SNE.

    Feature input is compared by squared Euclidean distance; a precomputed
    distance matrix is used as given. The first 100 steps exaggerate P by 4,
    momentum switches from 0.5 to 0.8 at step 250 and per-coordinate gains
    adapt the step of 100.

    Args:
        data: ``n×f`` features, or ``n×n`` distances when ``precomputed``.
        d_out: Embedding dimension.
        perplexity: Target perplexity; clamped to ``(n - 1) / 3``.
        iterations: Gradient steps.
        seed: Initialization seed.
        precomputed: Whether ``data`` is a distance matrix.

    Returns:
        Embedding: Coordinates and KL trace, deterministic given ``seed``.

    Raises:
        InputValidationError: With fewer than five points.
    """
    matrix = _matrix(data, "tsne")
    n = matrix.shape[0]
    if n < MIN_POINTS:
        raise InputValidationError(f"tsne: needs at least {MIN_POINTS} points, got {n}")
    if precomputed:
        distances = matrix
    else:
        squared = np.sum(matrix**2, axis=1)
        gram = matrix @ matrix.T
        distances = np.maximum(squared[:, None] + squared[None, :] - 2 * gram, 0.0)
        np.fill_diagonal(distances, 0.0)
    if perplexity > (n - 1) / 3:
        logger.warning(
            "tsne: perplexity %s too large for %s points, using %s",
            perplexity,
            n,
            (n - 1) / 3,
        )
        perplexity = (n - 1) / 3
    p = joint_probabilities(distances, perplexity)

    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, 1e-2, size=(n, d_out))
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    trace: list[float] = []
    for step in range(iterations + 1):
        squared = np.sum(y**2, axis=1)
        numerator = 1.0 / (1.0 + squared[:, None] + squared[None, :] - 2 * y @ y.T)
        np.fill_diagonal(numerator, 0.0)
        q = np.maximum(numerator / numerator.sum(), 1e-12)
        trace.append(_kl(p, q))
        if step == iterations:
            break
        scale = EXAGGERATION if step < EXAGGERATION_ITERATIONS else 1.0
        weights = (scale * p - q) * numerator
        gradient = 4.0 * (np.diag(weights.sum(axis=1)) - weights) @ y
        momentum = 0.5 if step < MOMENTUM_SWITCH else 0.8
        same_sign = (gradient > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, MIN_GAIN)
        update = momentum * update - LEARNING_RATE * gains * gradient
        y = y + update
        y = y - y.mean(axis=0)
    return Embedding(
        points=y,
        kl_trace=trace,
        perplexity=perplexity,
        iterations=iterations,
        seed=seed,
    )


def project_view(
    embedding: Embedding, num_prototypes: int, neighbor_of: Sequence[int]
) -> ProjectedView:
    """Dimensions two and three of a joint data/prototype embedding.

    Args:
        embedding: Embedding whose last ``num_prototypes`` rows are prototypes.
        num_prototypes: Prototype count.
        neighbor_of: Training-row index of each prototype's nearest neighbor.

    Returns:
        ProjectedView: Coordinates, prototype flags and neighbor markers.
    """
    points = embedding.points
    if points.shape[1] < 3:
        raise DimensionError(
            f"project_view: needs at least 3 embedding dims, got {points.shape[1]}"
        )
    n = points.shape[0]
    if not 0 <= num_prototypes <= n or len(neighbor_of) != num_prototypes:
        raise DimensionError(
            f"project_view: {num_prototypes} prototypes, {len(neighbor_of)} "
            f"neighbors, {n} points"
        )
    is_prototype = np.arange(n) >= n - num_prototypes
    nearest = np.full(n, -1, dtype=np.int64)
    nearest[is_prototype] = np.asarray(neighbor_of, dtype=np.int64)
    return ProjectedView(
        coords=points[:, 1:3].copy(),
        is_prototype=is_prototype,
        nearest_neighbor=nearest,
    )


def latent_map(
    latents: ArrayLike, prototypes: ArrayLike, config: LatentConfig
) -> tuple[Embedding, PcaResult]:
    """Embed training latents and prototypes jointly.

    PCA keeps ``min(pca_dim, q, n - 1)`` components; t-SNE then runs on
    ``1 - cosine_similarity`` of the reduced vectors.
    """
    stacked = np.vstack(
        [_matrix(latents, "latent_map"), _matrix(prototypes, "latent_map")]
    )
    n, q = stacked.shape
    reduced = pca(stacked, min(config.pca_dim, q, n - 1))
    logger.info(
        "latent map: %s components retain %.1f%% of the variance",
        reduced.components.shape[0],
        100.0 * reduced.retained_fraction,
    )
    distances = np.maximum(1.0 - cosine_similarity(reduced.projected), 0.0)
    np.fill_diagonal(distances, 0.0)
    embedding = tsne(
        distances,
        d_out=3,
        perplexity=config.perplexity,
        iterations=config.iterations,
        seed=config.seed,
        precomputed=True,
    )
    return embedding, reduced


def embedding_frame(
    embedding: Embedding, view: ProjectedView, labels: ArrayLike
) -> pd.DataFrame:
    """Rows of ``embedding.csv``.

    Columns are ``id, is_prototype, dim1, dim2, dim3, label,
    nearest_neighbor_id``; a prototype carries its nearest neighbor's label.

    Args:
        embedding: Joint embedding, prototypes last.
        view: Projection of the same embedding.
        labels: Labels of the data rows.
    """
    data_labels = np.asarray(labels, dtype=np.int64)
    prototype_labels = data_labels[view.nearest_neighbor[view.is_prototype]]
    all_labels = np.concatenate([data_labels, prototype_labels])
    points = embedding.points
    if all_labels.size != points.shape[0]:
        raise DimensionError(
            f"embedding_frame: {all_labels.size} labels for {points.shape[0]} points"
        )
    return pd.DataFrame(
        {
            "id": np.arange(points.shape[0]),
            "is_prototype": view.is_prototype.astype(np.int64),
            "dim1": points[:, 0],
            "dim2": points[:, 1],
            "dim3": points[:, 2],
            "label": all_labels,
            "nearest_neighbor_id": view.nearest_neighbor,
        }
    )
