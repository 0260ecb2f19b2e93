"""Training run and sweep artifact repository."""

from abc import abstractmethod
from pathlib import Path
from typing import Any, Optional, Protocol, Sequence

import pandas as pd

from src.core.errors import ParseError
from src.repositories.base import FileRepository, PathLike, blob_hash
from src.repositories.checkpoints import CheckpointRepository
from src.repositories.images import ImageRepository
from src.schemas.cli import CommandManifest
from src.schemas.objective import LossBreakdown
from src.schemas.training import EpochMetrics, RunManifest, RunRecord, SweepRow
from src.services.trainer import TrainResult

METRICS = "metrics.csv"
RUN_MANIFEST = "manifest.json"
FINAL_CHECKPOINT = "final.ckpt"
BEST_CHECKPOINT = "best.ckpt"
SWEEP_TABLE = "table.csv"
EMBEDDING = "embedding.csv"
SWEEP_MANIFEST = "sweep.json"
EMBEDDING_MANIFEST = "embedding.json"
LOSS_COLUMNS = ["e", "r", "r1", "r2", "pdl", "total"]
METRIC_COLUMNS = [
    "epoch",
    *LOSS_COLUMNS,
    "train_accuracy",
    "test_accuracy",
    "selection_accuracy",
    "psi_n",
    "psi_c",
]


def metrics_frame(history: Sequence[EpochMetrics]) -> pd.DataFrame:
    """Rows of ``metrics.csv``, one per epoch."""
    rows = [
        [
            m.epoch,
            *(getattr(m.train, name) for name in LOSS_COLUMNS),
            m.train_accuracy,
            m.test_accuracy,
            m.selection_accuracy,
            m.psi_n,
            m.psi_c,
        ]
        for m in history
    ]
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


class RunRepository(Protocol):
    """Interface for run and sweep persistence."""

    @abstractmethod
    def prepare_run(self, run_dir: PathLike, force: bool = False) -> Path:
        """Create an empty run directory.

        Args:
            run_dir: Run directory.
            force: Allow reusing a non-empty directory.

        Returns:
            Path: The directory.

        Raises:
            ArtifactExistsError: If the directory is non-empty and not forced.
        """
        ...

    @abstractmethod
    def save_run(
        self,
        run_dir: PathLike,
        result: TrainResult,
        height: int,
        width: int,
        invocation: Optional[CommandManifest] = None,
    ) -> RunRecord:
        """Write metrics, manifest, snapshots and checkpoints of a run.

        Args:
            run_dir: Run directory, already prepared.
            result: Training outcome.
            height: Image rows, for rendering snapshots.
            width: Image columns.
            invocation: Resolved command configuration, stored in the manifest.

        Returns:
            RunRecord: The run record with checkpoint paths filled in.
        """
        ...

    @abstractmethod
    def load_metrics(self, run_dir: PathLike) -> list[EpochMetrics]:
        """Read ``metrics.csv`` of a run.

        Args:
            run_dir: Run directory.

        Returns:
            list[EpochMetrics]: Metrics per epoch.
        """
        ...

    @abstractmethod
    def load_manifest(self, run_dir: PathLike) -> Optional[RunManifest]:
        """Read ``manifest.json`` of a run, if there is one.

        Args:
            run_dir: Run directory.

        Returns:
            Optional[RunManifest]: The manifest, or None when absent.
        """
        ...

    @abstractmethod
    def save_report(self, path: PathLike, document: dict[str, Any]) -> Path:
        """Write a JSON report.

        Args:
            path: Destination file.
            document: Report content.

        Returns:
            Path: The written file.
        """
        ...

    @abstractmethod
    def save_manifest(self, path: PathLike, manifest: CommandManifest) -> Path:
        """Write the provenance manifest of a command.

        Args:
            path: Destination file.
            manifest: Resolved config, input hashes and tool version.

        Returns:
            Path: The written file.
        """
        ...

    @abstractmethod
    def save_table(self, out: PathLike, rows: Sequence[SweepRow]) -> Path:
        """Write the sweep summary ``table.csv``.

        Args:
            out: Output root.
            rows: One row per penalty weight.

        Returns:
            Path: The written file.
        """
        ...

    @abstractmethod
    def save_embedding(self, out: PathLike, frame: pd.DataFrame) -> Path:
        """Write ``embedding.csv``.

        Args:
            out: Output root.
            frame: Embedding rows.

        Returns:
            Path: The written file.
        """
        ...


class FileRunRepository(FileRepository, RunRepository):
    """Run repository writing CSV, JSON, PGM and checkpoint files."""

    def __init__(
        self, images: ImageRepository, checkpoints: CheckpointRepository
    ):
        """Initialize the repository with its image and checkpoint codecs."""
        self._images = images
        self._checkpoints = checkpoints

    def prepare_run(self, run_dir: PathLike, force: bool = False) -> Path:
        return self.prepare_dir(run_dir, force)

    def save_run(
        self,
        run_dir: PathLike,
        result: TrainResult,
        height: int,
        width: int,
        invocation: Optional[CommandManifest] = None,
    ) -> RunRecord:
        directory = Path(run_dir)
        final = self._checkpoints.save(
            directory / FINAL_CHECKPOINT, result.final.model, result.final
        )
        best = self._checkpoints.save(directory / BEST_CHECKPOINT, result.best)
        for epoch, decoded in sorted(result.snapshots.items()):
            for j, row in enumerate(decoded):
                self._images.save(
                    directory / f"proto_epoch{epoch}_p{j}.pgm",
                    row.reshape(height, width),
                )
        if result.neighbors is not None:
            for j, row in enumerate(result.neighbors):
                self._images.save(
                    directory / f"neighbor_final_p{j}.pgm", row.reshape(height, width)
                )
        self.write_frame(directory / METRICS, metrics_frame(result.record.epochs))
        record = result.record.model_copy(
            update={
                "checkpoints": {
                    "final": final.relative_to(directory).as_posix(),
                    "best": best.relative_to(directory).as_posix(),
                }
            }
        )
        self.write_json(
            directory / RUN_MANIFEST,
            {
                **record.manifest.model_dump(mode="json"),
                "best_epoch": record.best_epoch,
                "aborted": record.aborted,
                "checkpoints": record.checkpoints,
                "checkpoint_hashes": {
                    "final": blob_hash(final.read_bytes()),
                    "best": blob_hash(best.read_bytes()),
                },
                "invocation": (
                    invocation.model_dump(mode="json") if invocation else None
                ),
            },
        )
        return record

    def load_metrics(self, run_dir: PathLike) -> list[EpochMetrics]:
        path = Path(run_dir) / METRICS
        frame = self.read_frame(path)
        missing = set(METRIC_COLUMNS) - set(frame.columns)
        if missing:
            raise ParseError(f"{path}: missing columns {sorted(missing)}")
        history = []
        for row in frame.to_dict(orient="records"):
            history.append(
                EpochMetrics(
                    epoch=int(row["epoch"]),
                    train=LossBreakdown(**{name: row[name] for name in LOSS_COLUMNS}),
                    train_accuracy=row["train_accuracy"],
                    test_accuracy=row["test_accuracy"],
                    selection_accuracy=row["selection_accuracy"],
                    psi_n=row["psi_n"],
                    psi_c=row["psi_c"],
                )
            )
        return history

    def load_manifest(self, run_dir: PathLike) -> Optional[RunManifest]:
        path = Path(run_dir) / RUN_MANIFEST
        if not path.exists():
            return None
        return RunManifest.model_validate(self.read_json(path))

    def save_report(self, path: PathLike, document: dict[str, Any]) -> Path:
        return self.write_json(path, document)

    def save_manifest(self, path: PathLike, manifest: CommandManifest) -> Path:
        return self.write_json(path, manifest.model_dump(mode="json"))

    def save_table(self, out: PathLike, rows: Sequence[SweepRow]) -> Path:
        frame = pd.DataFrame([row.model_dump() for row in rows])
        return self.write_frame(Path(out) / SWEEP_TABLE, frame)

    def save_embedding(self, out: PathLike, frame: pd.DataFrame) -> Path:
        return self.write_frame(Path(out) / EMBEDDING, frame)
