"""Image datasets built from synthetic segments."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from src.core.config import settings
from src.core.errors import ConfigurationError, DimensionError
from src.core.seeding import Stream, derive_seed
from src.core.utils import get_logger
from src.schemas.signals import DatasetSpec, Modality, SegmentRecord, SeverityLabel
from src.signalkit import (
    ImageExample,
    LabeledSegment,
    bandpass,
    generate_segment,
    normalize,
    rasterize,
)

logger = get_logger()

NUM_CLASSES = len(SeverityLabel)


@dataclass(frozen=True, eq=False)
class ImageDataset:
    """Flattened labeled images.

    Attributes:
        images: ``n×(H*W)`` pixels in ``[0, 1]``.
        labels: ``n`` class indices.
        ids: Image identifiers.
        height: Image rows.
        width: Image columns.
    """

    images: np.ndarray
    labels: np.ndarray
    ids: Sequence[str]
    height: int
    width: int

    def __post_init__(self) -> None:
        n = self.images.shape[0]
        if self.images.shape != (n, self.height * self.width):
            raise DimensionError(
                f"dataset: images {list(self.images.shape)} vs "
                f"{self.height}x{self.width}"
            )
        if self.labels.shape != (n,) or len(self.ids) != n:
            raise DimensionError(
                f"dataset: {n} images, {self.labels.shape[0]} labels, "
                f"{len(self.ids)} ids"
            )

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def input_dim(self) -> int:
        """Flattened image size."""
        return self.height * self.width

    def subset(self, indices: ArrayLike) -> ImageDataset:
        """Rows at ``indices``, in that order."""
        index = np.asarray(indices, dtype=np.int64)
        return ImageDataset(
            images=self.images[index],
            labels=self.labels[index],
            ids=[self.ids[i] for i in index],
            height=self.height,
            width=self.width,
        )

    @classmethod
    def from_examples(
        cls, examples: Sequence[ImageExample], ids: Sequence[str]
    ) -> ImageDataset:
        """Stack rendered examples; every example must carry a label."""
        if not examples:
            raise ConfigurationError("dataset: no examples")
        height, width = examples[0].height, examples[0].width
        labels = []
        for example in examples:
            if example.label is None:
                raise ConfigurationError("dataset: unlabeled example")
            labels.append(int(example.label))
        return cls(
            images=np.vstack([example.flatten() for example in examples]),
            labels=np.asarray(labels, dtype=np.int64),
            ids=list(ids),
            height=height,
            width=width,
        )


def preprocess(segment: LabeledSegment, spec: DatasetSpec) -> ImageExample:
    """Render a segment the way a monitor would show it.

    ECG is band-passed before normalization; respiration is only normalized.
    """
    waveform = segment.waveform
    if segment.modality is Modality.ECG:
        waveform = bandpass(waveform)
    return rasterize(
        normalize(waveform),
        height=spec.height,
        width=spec.width,
        mode=spec.raster_mode,
        label=segment.label,
    )


def segment_plan(spec: DatasetSpec) -> list[tuple[str, SeverityLabel, int]]:
    """Identifier, class and seed of every segment, in dataset order.

    Raises:
        ConfigurationError: On an unknown class name.
    """
    plan = []
    for slug in spec.counts:
        if slug not in {label.slug for label in SeverityLabel}:
            raise ConfigurationError(f"dataset: unknown class {slug!r}")
    for label in SeverityLabel:
        count = spec.counts.get(label.slug, 0)
        if count == 0:
            logger.warning("dataset: class %s has no segments", label.slug)
        for i in range(count):
            seed = derive_seed(spec.seed, Stream.SEGMENT, int(label), i)
            plan.append((f"{label.slug}_{i:05d}", label, seed))
    return plan


def build_dataset(
    spec: DatasetSpec,
) -> tuple[ImageDataset, list[SegmentRecord], list[LabeledSegment]]:
    """Generate, preprocess and render every requested segment.

    Segments are generated from per-segment seeds, so the result does not
    depend on the number of worker threads.

    Returns:
        tuple: Images, manifest rows and the raw segments.
    """
    plan = segment_plan(spec)

    def one(item: tuple[str, SeverityLabel, int]) -> LabeledSegment:
        _, label, seed = item
        return generate_segment(spec.modality, label, seed, spec.noise_sigma)

    with ThreadPoolExecutor(max_workers=max(settings.NUM_THREADS, 1)) as pool:
        segments = list(pool.map(one, plan))
    logger.info("generated %s %s segments", len(segments), spec.modality.value)

    examples = [preprocess(segment, spec) for segment in segments]
    records = [
        SegmentRecord(
            id=item_id,
            modality=spec.modality,
            label=label.slug,
            seed=seed,
            attempt=segment.attempt,
        )
        for (item_id, label, seed), segment in zip(plan, segments)
    ]
    ids = [item_id for item_id, _, _ in plan]
    return ImageDataset.from_examples(examples, ids), records, segments
