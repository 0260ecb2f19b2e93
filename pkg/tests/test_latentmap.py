"""Latent-space analysis tests."""

import numpy as np
import pytest

from src.core.errors import DimensionError, InputValidationError
from src.schemas.cli import LatentConfig
from src.services.diversity import nearest_neighbors
from src.services.latentmap import (
    Embedding,
    cosine_similarity,
    embedding_frame,
    joint_probabilities,
    latent_map,
    pca,
    project_view,
    tsne,
)


def _clusters(rng: np.random.Generator, per_cluster: int = 50) -> tuple:
    centers = np.eye(3, 10) * 20.0
    points = np.vstack(
        [center + rng.normal(size=(per_cluster, 10)) for center in centers]
    )
    return points, np.repeat(np.arange(3), per_cluster)


def test_pca_components_are_orthonormal(rng: np.random.Generator) -> None:
    """Rows of the component matrix form an orthonormal set."""
    x = rng.normal(size=(40, 12)) @ rng.normal(size=(12, 12))
    result = pca(x, 5)
    gram = result.components @ result.components.T
    assert np.max(np.abs(gram - np.eye(5))) < 1e-10
    assert result.projected.shape == (40, 5)
    assert np.all(np.diff(result.explained_variance) <= 1e-12)
    assert 0.0 < result.retained_fraction <= 1.0


def test_pca_full_rank_reconstructs(rng: np.random.Generator) -> None:
    """Keeping every component loses nothing."""
    x = rng.normal(size=(20, 4))
    result = pca(x, 4)
    restored = result.projected @ result.components + result.mean
    np.testing.assert_allclose(restored, x, atol=1e-10)
    assert result.retained_fraction == pytest.approx(1.0)


def test_pca_sign_convention(rng: np.random.Generator) -> None:
    """The largest loading of every component is positive."""
    result = pca(rng.normal(size=(30, 6)), 3)
    for row in result.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_pca_dimension_bounds(rng: np.random.Generator) -> None:
    """d must lie in [1, min(n - 1, q)]."""
    x = rng.normal(size=(5, 8))
    with pytest.raises(InputValidationError):
        pca(x, 0)
    with pytest.raises(InputValidationError):
        pca(x, 5)


def test_cosine_similarity_examples(rng: np.random.Generator) -> None:
    """Identical rows, orthogonal rows, zero rows and a loop oracle."""
    assert cosine_similarity([[1.0, 2.0], [2.0, 4.0]])[0, 1] == pytest.approx(1.0)
    assert cosine_similarity([[1.0, 0.0], [0.0, 3.0]])[0, 1] == 0.0
    zero = cosine_similarity([[0.0, 0.0], [1.0, 1.0]])
    assert zero[0, 1] == 0.0
    assert zero[0, 0] == 1.0
    x = rng.normal(size=(8, 5))
    s = cosine_similarity(x)
    for i in range(8):
        for j in range(8):
            expected = x[i] @ x[j] / (np.linalg.norm(x[i]) * np.linalg.norm(x[j]))
            assert abs(s[i, j] - expected) < 1e-12
    assert np.array_equal(s, s.T)


def test_joint_probabilities_equidistant_points() -> None:
    """Three equidistant points share the mass evenly."""
    distances = np.ones((3, 3)) - np.eye(3)
    p = joint_probabilities(distances, 2.0)
    expected = (np.ones((3, 3)) - np.eye(3)) / 6.0
    np.testing.assert_allclose(p, expected, atol=1e-12)


def test_joint_probabilities_properties(rng: np.random.Generator) -> None:
    """Symmetric, zero diagonal, normalized."""
    x = rng.normal(size=(25, 4))
    distances = np.sum((x[:, None] - x[None, :]) ** 2, axis=2)
    p = joint_probabilities(distances, 5.0)
    np.testing.assert_allclose(p, p.T, atol=1e-15)
    assert np.all(np.diag(p) == 0.0)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(p >= 0.0)
    with pytest.raises(InputValidationError):
        joint_probabilities(-distances, 5.0)


def test_tsne_reduces_kl_and_separates_clusters(rng: np.random.Generator) -> None:
    """Three well separated blobs stay separated."""
    points, labels = _clusters(rng)
    embedding = tsne(points, d_out=3, perplexity=30.0, iterations=500, seed=3)
    assert embedding.points.shape == (150, 3)
    assert len(embedding.kl_trace) == 501
    assert embedding.kl_trace[-1] < embedding.kl_trace[0]
    y = embedding.points
    distances = np.sum((y[:, None] - y[None, :]) ** 2, axis=2)
    np.fill_diagonal(distances, np.inf)
    nearest = np.argmin(distances, axis=1)
    assert np.mean(labels[nearest] == labels) >= 0.98


def test_tsne_is_deterministic_per_seed(rng: np.random.Generator) -> None:
    """Same seed, same coordinates; another seed, other coordinates."""
    x = rng.normal(size=(20, 5))
    first = tsne(x, iterations=50, perplexity=5.0, seed=1)
    second = tsne(x, iterations=50, perplexity=5.0, seed=1)
    other = tsne(x, iterations=50, perplexity=5.0, seed=2)
    assert np.array_equal(first.points, second.points)
    assert not np.array_equal(first.points, other.points)


def test_tsne_guards(rng: np.random.Generator) -> None:
    """Too few points fail; an oversized perplexity is clamped."""
    with pytest.raises(InputValidationError):
        tsne(rng.normal(size=(4, 3)))
    embedding = tsne(rng.normal(size=(10, 3)), perplexity=30.0, iterations=5)
    assert embedding.perplexity == pytest.approx(3.0)


def test_project_view_marks_prototypes() -> None:
    """Dimensions two and three, prototypes last."""
    points = np.arange(18, dtype=float).reshape(6, 3)
    view = project_view(Embedding(points=points), 2, [0, 3])
    np.testing.assert_array_equal(view.coords, points[:, 1:3])
    assert view.coords.shape[1] == 2
    assert view.is_prototype.tolist() == [False] * 4 + [True] * 2
    assert view.nearest_neighbor.tolist() == [-1, -1, -1, -1, 0, 3]
    with pytest.raises(DimensionError):
        project_view(Embedding(points=np.zeros((6, 2))), 2, [0, 3])
    with pytest.raises(DimensionError):
        project_view(Embedding(points=points), 2, [0])


def test_latent_map_and_frame(rng: np.random.Generator) -> None:
    """Joint embedding of latents and prototypes, exported row by row."""
    latents = rng.uniform(size=(30, 8))
    prototypes = rng.uniform(size=(4, 8))
    labels = np.arange(30) % 3
    config = LatentConfig(pca_dim=500, perplexity=5.0, iterations=100, seed=2)
    embedding, reduced = latent_map(latents, prototypes, config)
    assert embedding.points.shape == (34, 3)
    assert reduced.components.shape == (8, 8)
    neighbors = nearest_neighbors(prototypes, latents)
    view = project_view(embedding, 4, neighbors.tolist())
    frame = embedding_frame(embedding, view, labels)
    assert list(frame.columns) == [
        "id",
        "is_prototype",
        "dim1",
        "dim2",
        "dim3",
        "label",
        "nearest_neighbor_id",
    ]
    assert len(frame) == 34
    assert frame["is_prototype"].sum() == 4
    prototype_rows = frame[frame["is_prototype"] == 1]
    assert prototype_rows["nearest_neighbor_id"].tolist() == neighbors.tolist()
    assert prototype_rows["label"].tolist() == labels[neighbors].tolist()
    again, _ = latent_map(latents, prototypes, config)
    assert np.array_equal(again.points, embedding.points)
