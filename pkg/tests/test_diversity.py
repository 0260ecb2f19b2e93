"""Diversity score and evaluation tests."""

import itertools
import math

import numpy as np
import pytest

from src.core.errors import DimensionError, InputValidationError
from src.ndgrad import value_of
from src.services.diversity import (
    classification_report,
    diversity_report,
    evaluate,
    nearest_neighbors,
    psi,
)
from src.services.protomodel import PrototypeModel, encode


def test_psi_examples() -> None:
    """All distinct, all shared and an uneven class grouping."""
    assert psi([1, 1, 1, 1], 4, 4) == 1.0
    assert psi([4], 4, 4) == pytest.approx(0.5)
    expected = (math.sqrt(8) + math.sqrt(2)) / math.sqrt(30)
    assert psi([8, 2, 0], 10, 3) == pytest.approx(expected, abs=1e-12)
    assert round(psi([8, 2, 0], 10, 3), 4) == 0.7746
    assert round(psi([8, 1, 1], 10, 3), 3) == 0.882


def test_psi_validation() -> None:
    """Negative counts and wrong totals are rejected."""
    with pytest.raises(InputValidationError):
        psi([3, -1], 2, 2)
    with pytest.raises(InputValidationError):
        psi([1, 1], 3, 3)


def _compositions(m: int, bins: int):
    for counts in itertools.product(range(m + 1), repeat=bins):
        if sum(counts) == m:
            yield counts


def test_psi_exhaustive_against_oracle() -> None:
    """Every composition of small m over up to four bins."""
    for m in range(1, 7):
        for bins in range(1, 5):
            for counts in _compositions(m, bins):
                oracle = sum(math.sqrt(c) for c in counts) / math.sqrt(
                    min(bins, m) * m
                )
                value = psi(counts, m, bins)
                assert value == pytest.approx(min(oracle, 1.0), abs=1e-12)
                assert 0.0 < value <= 1.0
                if bins <= m:
                    even = all(c * bins == m for c in counts)
                else:
                    even = all(c <= 1 for c in counts)
                assert (value == pytest.approx(1.0, abs=1e-12)) == even
                assert psi(sorted(counts), m, bins) == value


def test_psi_ignores_bin_order() -> None:
    """Permuting the bins gives the identical float."""
    assert psi([2, 2, 1], 5, 3) == psi([1, 2, 2], 5, 3)
    for counts in _compositions(7, 4):
        values = {psi(list(order), 7, 4) for order in itertools.permutations(counts)}
        assert len(values) == 1


def test_psi_spreading_never_decreases() -> None:
    """Moving a unit from a larger bin to a strictly smaller one."""
    for m in range(2, 7):
        for counts in _compositions(m, 3):
            for src, dst in itertools.permutations(range(3), 2):
                if counts[src] > counts[dst] + 1:
                    moved = list(counts)
                    moved[src] -= 1
                    moved[dst] += 1
                    assert psi(moved, m, 3) >= psi(counts, m, 3) - 1e-15


def test_nearest_neighbors_examples(rng: np.random.Generator) -> None:
    """Hand example, prototypes drawn from the data and a loop oracle."""
    assert nearest_neighbors([[0.0, 0.0]], [[1.0, 0.0], [0.0, 2.0]]).tolist() == [0]
    z = rng.normal(size=(12, 3))
    assert nearest_neighbors(z[[4, 7, 1]], z).tolist() == [4, 7, 1]
    p = rng.normal(size=(5, 3))
    expected = [int(np.argmin([np.sum((a - b) ** 2) for b in z])) for a in p]
    assert nearest_neighbors(p, z).tolist() == expected


def test_nearest_neighbors_validation() -> None:
    """Empty and mismatched latents."""
    with pytest.raises(InputValidationError):
        nearest_neighbors(np.zeros((2, 3)), np.zeros((0, 3)))
    with pytest.raises(DimensionError):
        nearest_neighbors(np.zeros((2, 3)), np.zeros((4, 2)))


def test_diversity_report_groupings() -> None:
    """Neighbor and class bins follow the nearest training examples."""
    z = np.array([[0.0], [1.0], [2.0], [3.0]])
    labels = np.array([0, 0, 1, 2])
    prototypes = np.array([[0.1], [0.2], [0.9], [2.1]])
    report = diversity_report(prototypes, z, labels, 3)
    assert report.neighbor_of == [0, 0, 1, 2]
    assert report.class_of == [0, 0, 0, 1]
    assert report.t_neighbor == 3
    assert report.t_class == 2
    assert report.psi_n == pytest.approx(psi([2, 1, 1], 4, 4))
    assert report.psi_c == pytest.approx(psi([3, 1, 0], 4, 3))


def test_renumbering_training_examples_keeps_scores(
    rng: np.random.Generator,
) -> None:
    """A consistent permutation of the training set leaves both scores."""
    z = rng.normal(size=(30, 4))
    labels = rng.integers(0, 3, size=30)
    prototypes = rng.normal(size=(6, 4))
    order = rng.permutation(30)
    first = diversity_report(prototypes, z, labels, 3)
    second = diversity_report(prototypes, z[order], labels[order], 3)
    assert first.psi_n == second.psi_n
    assert first.psi_c == second.psi_c


def test_classification_report_examples() -> None:
    """Perfect and constant classifiers on a balanced set."""
    truth = np.repeat([0, 1, 2], 4)
    perfect = classification_report(truth, truth, 3)
    assert perfect.accuracy == 1.0
    assert perfect.confusion == (4 * np.eye(3, dtype=int)).tolist()
    constant = classification_report(np.zeros(12, dtype=int), truth, 3)
    assert constant.accuracy == pytest.approx(1.0 / 3.0)


def test_classification_report_absent_class_warns() -> None:
    """Missing classes are recorded, not fatal."""
    report = classification_report([0, 1], [0, 1], 3)
    assert report.accuracy == 1.0
    assert report.warnings == ["class 2 absent from test set"]
    with pytest.raises(InputValidationError):
        classification_report([], [], 3)


def test_evaluate_matches_direct_scores(
    tiny_model: PrototypeModel, tiny_batch: tuple[np.ndarray, np.ndarray]
) -> None:
    """Scores agree with psi on the nearest-neighbor groupings."""
    images, labels = tiny_batch
    report, diversity = evaluate(tiny_model, images, labels, images, labels)
    assert 0.0 <= report.accuracy <= 1.0
    neighbors = nearest_neighbors(
        tiny_model.prototypes, value_of(encode(tiny_model, images))
    )
    _, counts = np.unique(neighbors, return_counts=True)
    assert diversity.neighbor_of == neighbors.tolist()
    assert diversity.psi_n == psi(counts, 4, 4)
    class_counts = np.bincount(labels[neighbors], minlength=3)
    assert diversity.psi_c == psi(class_counts, 4, 3)
