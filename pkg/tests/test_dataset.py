"""Dataset construction tests."""

import numpy as np
import pytest

from src.core.errors import ConfigurationError
from src.schemas.signals import DatasetSpec, Modality, SeverityLabel
from src.services.dataset import build_dataset, segment_plan


def test_segment_plan_ids_and_seeds() -> None:
    """Class-major order, zero-padded ids, seeds fixed by the master seed."""
    spec = DatasetSpec(counts={"normal": 2, "mild": 1, "moderate_severe": 2}, seed=4)
    plan = segment_plan(spec)
    assert [item_id for item_id, _, _ in plan] == [
        "normal_00000",
        "normal_00001",
        "mild_00000",
        "moderate_severe_00000",
        "moderate_severe_00001",
    ]
    assert [label for _, label, _ in plan] == [
        SeverityLabel.NORMAL,
        SeverityLabel.NORMAL,
        SeverityLabel.MILD,
        SeverityLabel.MODERATE_SEVERE,
        SeverityLabel.MODERATE_SEVERE,
    ]
    assert segment_plan(spec) == plan
    seeds = [seed for _, _, seed in plan]
    assert len(set(seeds)) == len(seeds)
    other = segment_plan(spec.model_copy(update={"seed": 5}))
    assert [seed for _, _, seed in other] != seeds


def test_segment_plan_rejects_unknown_class() -> None:
    """Only the three severity classes exist."""
    with pytest.raises(ConfigurationError):
        segment_plan(DatasetSpec(counts={"normal": 1, "severe": 1}))


def test_segment_plan_allows_empty_class() -> None:
    """A zero count just leaves the class out."""
    plan = segment_plan(DatasetSpec(counts={"normal": 2, "mild": 0}))
    assert [item_id for item_id, _, _ in plan] == ["normal_00000", "normal_00001"]


@pytest.mark.parametrize("modality", list(Modality))
def test_build_dataset(modality: Modality) -> None:
    """Rendered images with the requested geometry, built deterministically."""
    spec = DatasetSpec(
        modality=modality,
        counts={"normal": 2, "mild": 2, "moderate_severe": 2},
        seed=1,
    )
    dataset, records, segments = build_dataset(spec)
    assert dataset.images.shape == (6, 32 * 64)
    assert dataset.labels.tolist() == [0, 0, 1, 1, 2, 2]
    assert np.all((dataset.images >= 0.0) & (dataset.images <= 1.0))
    assert [r.id for r in records] == list(dataset.ids)
    assert [r.label for r in records] == [s.label.slug for s in segments]
    assert all(r.modality is modality for r in records)
    again, _, _ = build_dataset(spec)
    assert np.array_equal(again.images, dataset.images)
