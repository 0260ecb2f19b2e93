"""Dataset artifact repository."""

from abc import abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
import pandas as pd

from src.core.config import settings
from src.core.errors import ParseError
from src.repositories.base import FileRepository, PathLike, content_hash
from src.repositories.images import ImageRepository
from src.schemas.signals import DatasetSpec, SegmentRecord, SeverityLabel
from src.services.dataset import ImageDataset

MANIFEST = "manifest.csv"
DESCRIPTOR = "dataset.json"
IMAGE_DIR = "images"
MANIFEST_COLUMNS = ["id", "modality", "class", "seed", "flagged", "attempt"]


@dataclass(frozen=True)
class StoredDataset:
    """A dataset read back from disk.

    Attributes:
        dataset: Images and labels.
        records: Manifest rows.
        content_hash: Hash of the images and manifest.
    """

    dataset: ImageDataset
    records: list[SegmentRecord]
    content_hash: str


class DatasetRepository(Protocol):
    """Interface for dataset persistence."""

    @abstractmethod
    def prepare(self, root: PathLike, force: bool = False) -> Path:
        """Create an empty dataset directory.

        Args:
            root: Dataset directory.
            force: Allow overwriting a non-empty directory.

        Returns:
            Path: The directory.

        Raises:
            ArtifactExistsError: If the directory is non-empty and not forced.
        """
        ...

    @abstractmethod
    def save(
        self,
        root: PathLike,
        dataset: ImageDataset,
        records: Sequence[SegmentRecord],
        spec: DatasetSpec,
        force: bool = False,
    ) -> str:
        """Write images, ``manifest.csv`` and ``dataset.json``.

        Args:
            root: Dataset directory.
            dataset: Rendered images.
            records: One manifest row per image.
            spec: Generation request, recorded in ``dataset.json``.
            force: Allow overwriting a non-empty directory.

        Returns:
            str: Content hash of the written dataset.
        """
        ...

    @abstractmethod
    def load(self, root: PathLike) -> StoredDataset:
        """Read a dataset written by ``save``.

        Args:
            root: Dataset directory.

        Returns:
            StoredDataset: Images, manifest rows and content hash.
        """
        ...


class PgmDatasetRepository(FileRepository, DatasetRepository):
    """Dataset repository storing one PGM file per image."""

    def __init__(self, images: ImageRepository):
        """Initialize the repository with an image codec."""
        self._images = images

    def prepare(self, root: PathLike, force: bool = False) -> Path:
        return self.prepare_dir(root, force)

    def _files(self, root: Path, ids: Sequence[str]) -> list[Path]:
        return [root / MANIFEST, *(root / IMAGE_DIR / f"{i}.pgm" for i in ids)]

    def save(
        self,
        root: PathLike,
        dataset: ImageDataset,
        records: Sequence[SegmentRecord],
        spec: DatasetSpec,
        force: bool = False,
    ) -> str:
        directory = self.prepare_dir(root, force)
        for item_id, row in zip(dataset.ids, dataset.images):
            self._images.save(
                directory / IMAGE_DIR / f"{item_id}.pgm",
                row.reshape(dataset.height, dataset.width),
            )
        frame = pd.DataFrame(
            [
                [r.id, r.modality.value, r.label, r.seed, int(r.flagged), r.attempt]
                for r in records
            ],
            columns=MANIFEST_COLUMNS,
        )
        self.write_frame(directory / MANIFEST, frame)
        digest = content_hash(directory, self._files(directory, dataset.ids))
        self.write_json(
            directory / DESCRIPTOR,
            {
                "spec": spec.model_dump(mode="json"),
                "tool_version": settings.VERSION,
                "content_hash": digest,
                "count": len(dataset),
                "height": dataset.height,
                "width": dataset.width,
            },
        )
        return digest

    def load(self, root: PathLike) -> StoredDataset:
        directory = Path(root)
        frame = self.read_frame(directory / MANIFEST)
        missing = set(MANIFEST_COLUMNS[:5]) - set(frame.columns)
        if missing:
            raise ParseError(
                f"{directory / MANIFEST}: missing columns {sorted(missing)}"
            )
        ids = [str(i) for i in frame["id"]]
        if not ids:
            raise ParseError(f"{directory / MANIFEST}: no images")
        images = [self._images.load(directory / IMAGE_DIR / f"{i}.pgm") for i in ids]
        height, width = images[0].shape
        if any(image.shape != (height, width) for image in images):
            raise ParseError(f"{directory}: images differ in size")
        records = []
        for line, row in enumerate(frame.itertuples(index=False), start=2):
            try:
                SeverityLabel.from_slug(str(row[2]))
                records.append(
                    SegmentRecord(
                        id=str(row[0]),
                        modality=row[1],
                        label=str(row[2]),
                        seed=int(row[3]),
                        flagged=bool(row[4]),
                        attempt=int(row[5]) if len(row) > 5 else 0,
                    )
                )
            except (KeyError, ValueError) as e:
                raise ParseError(f"{directory / MANIFEST}: {e}", line=line) from e
        dataset = ImageDataset(
            images=np.vstack([image.reshape(-1) for image in images]),
            labels=np.asarray(
                [int(SeverityLabel.from_slug(r.label)) for r in records], dtype=np.int64
            ),
            ids=ids,
            height=height,
            width=width,
        )
        digest = content_hash(directory, self._files(directory, ids))
        return StoredDataset(dataset=dataset, records=records, content_hash=digest)
