"""Artifact repository tests."""

from pathlib import Path

import numpy as np
import pytest

from src.core.errors import ArtifactExistsError, ParseError
from src.repositories.base import FileRepository, blob_hash, content_hash
from src.repositories.checkpoints import (
    MAGIC,
    BinaryCheckpointRepository,
    decode_checkpoint,
    encode_checkpoint,
)
from src.repositories.datasets import MANIFEST, PgmDatasetRepository
from src.repositories.images import PgmImageRepository, decode_pgm, encode_pgm
from src.repositories.runs import (
    BEST_CHECKPOINT,
    FINAL_CHECKPOINT,
    METRICS,
    RUN_MANIFEST,
    FileRunRepository,
)
from src.schemas.model import ModelConfig
from src.schemas.signals import DatasetSpec, Modality, SegmentRecord, SeverityLabel
from src.schemas.training import SweepRow, TrainConfig
from src.services.dataset import ImageDataset
from src.services.optim import AdamState
from src.services.protomodel import PrototypeModel, init
from src.services.trainer import TrainState, train


def _records(dataset: ImageDataset) -> list[SegmentRecord]:
    return [
        SegmentRecord(
            id=item_id,
            modality=Modality.ECG,
            label=SeverityLabel(int(label)).slug,
            seed=i,
        )
        for i, (item_id, label) in enumerate(zip(dataset.ids, dataset.labels))
    ]


def test_pgm_encode_decode() -> None:
    """Eight-bit quantization, header and row-major layout."""
    pixels = np.array([[0.0, 0.4, 1.0], [0.25, 0.75, 0.2]])
    data = encode_pgm(pixels)
    assert data.startswith(b"P5\n3 2\n255\n")
    assert len(data) == len(b"P5\n3 2\n255\n") + 6
    decoded = decode_pgm(data)
    assert decoded.shape == (2, 3)
    np.testing.assert_allclose(decoded, pixels, atol=0.5 / 255)
    assert decoded[0, 2] == 1.0


def test_pgm_header_comments() -> None:
    """Comment lines in the header are skipped."""
    data = b"P5\n# written by hand\n2 1\n# depth\n255\n" + bytes([0, 255])
    np.testing.assert_array_equal(decode_pgm(data), [[0.0, 1.0]])


@pytest.mark.parametrize(
    "data",
    [
        b"P2\n2 1\n255\n01",
        b"P5\n2 1\n",
        b"P5\nx 1\n255\n01",
        b"P5\n2 2\n255\n\x00\x01",
        b"P5\n0 1\n255\n",
    ],
)
def test_pgm_malformed(data: bytes) -> None:
    """Bad magic, truncation, junk fields and empty geometry fail to parse."""
    with pytest.raises(ParseError):
        decode_pgm(data)


def test_pgm_repository_clips_and_reports_missing(tmp_path: Path) -> None:
    """Saved images are clipped to [0, 1]; a missing file is a parse error."""
    repository = PgmImageRepository()
    path = repository.save(tmp_path / "a.pgm", np.array([[-0.2, 1.3]]))
    np.testing.assert_array_equal(repository.load(path), [[0.0, 1.0]])
    with pytest.raises(ParseError):
        repository.load(tmp_path / "missing.pgm")


def test_checkpoint_round_trip(tiny_model: PrototypeModel) -> None:
    """Every parameter survives bit for bit."""
    data = encode_checkpoint(tiny_model)
    decoded = decode_checkpoint(data)
    assert decoded.state is None
    assert decoded.digest == blob_hash(data)
    assert decoded.model.config == tiny_model.config
    assert list(decoded.model.params) == list(tiny_model.params)
    for name, tensor in tiny_model.params.items():
        assert tensor.bitwise_equal(decoded.model.params[name])


def test_checkpoint_with_training_state(tiny_model: PrototypeModel) -> None:
    """Adam moments, step and epoch are stored when given."""
    rng = np.random.default_rng(3)
    zeros = AdamState.zeros(tiny_model.params)
    adam = AdamState(
        step=17,
        m={name: rng.normal(size=v.shape) for name, v in zeros.m.items()},
        v={name: rng.uniform(size=v.shape) for name, v in zeros.v.items()},
    )
    state = TrainState(model=tiny_model, adam=adam, epoch=4)
    decoded = decode_checkpoint(encode_checkpoint(tiny_model, state))
    assert decoded.state is not None
    assert decoded.state.epoch == 4
    assert decoded.state.adam.step == 17
    for name in tiny_model.params:
        assert np.array_equal(decoded.state.adam.m[name], adam.m[name])
        assert np.array_equal(decoded.state.adam.v[name], adam.v[name])


def test_checkpoint_malformed(tiny_model: PrototypeModel) -> None:
    """Bad magic, truncation and trailing bytes are rejected."""
    data = encode_checkpoint(tiny_model)
    assert data.startswith(MAGIC)
    with pytest.raises(ParseError):
        decode_checkpoint(b"XXXX" + data[4:])
    with pytest.raises(ParseError):
        decode_checkpoint(data[:-5])
    with pytest.raises(ParseError):
        decode_checkpoint(data + b"\x00")


def test_checkpoint_repository(tmp_path: Path) -> None:
    """Files on disk decode to the saved model."""
    config = ModelConfig(
        input_dim=16,
        latent_dim=4,
        num_prototypes=3,
        num_classes=3,
        hidden_sizes=(8, 6, 5),
        seed=2,
    )
    model = init(config)
    repository = BinaryCheckpointRepository()
    path = repository.save(tmp_path / "m.ckpt", model)
    loaded = repository.load(path).model
    for name, tensor in model.params.items():
        assert tensor.bitwise_equal(loaded.params[name])
    with pytest.raises(ParseError):
        repository.load(tmp_path / "none.ckpt")


def test_content_hash_ignores_write_order(tmp_path: Path) -> None:
    """Hash names the content, not the listing order."""
    (tmp_path / "a.txt").write_bytes(b"alpha")
    (tmp_path / "b.txt").write_bytes(b"beta")
    files = [tmp_path / "a.txt", tmp_path / "b.txt"]
    first = content_hash(tmp_path, files)
    assert first == content_hash(tmp_path, list(reversed(files)))
    (tmp_path / "b.txt").write_bytes(b"gamma")
    assert content_hash(tmp_path, files) != first


def test_prepare_dir_refuses_non_empty(tmp_path: Path) -> None:
    """A non-empty directory needs force."""
    repository = FileRepository()
    target = tmp_path / "out"
    repository.prepare_dir(target)
    (target / "file").write_text("x")
    with pytest.raises(ArtifactExistsError):
        repository.prepare_dir(target)
    assert repository.prepare_dir(target, force=True) == target


def test_read_json_errors(tmp_path: Path) -> None:
    """Missing and malformed JSON surface as parse errors."""
    repository = FileRepository()
    with pytest.raises(ParseError):
        repository.read_json(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{\n  oops\n}")
    with pytest.raises(ParseError) as info:
        repository.read_json(tmp_path / "bad.json")
    assert info.value.line == 2


def test_dataset_save_and_load(tmp_path: Path, toy_dataset: ImageDataset) -> None:
    """Images, labels and ids come back; the hash matches."""
    repository = PgmDatasetRepository(PgmImageRepository())
    records = _records(toy_dataset)
    digest = repository.save(tmp_path / "ds", toy_dataset, records, DatasetSpec())
    stored = repository.load(tmp_path / "ds")
    assert stored.content_hash == digest
    assert list(stored.dataset.ids) == list(toy_dataset.ids)
    assert np.array_equal(stored.dataset.labels, toy_dataset.labels)
    assert (stored.dataset.height, stored.dataset.width) == (8, 8)
    np.testing.assert_allclose(stored.dataset.images, toy_dataset.images, atol=0.002)
    assert stored.records == records
    assert (tmp_path / "ds" / "dataset.json").exists()


def test_dataset_hash_is_location_independent(
    tmp_path: Path, toy_dataset: ImageDataset
) -> None:
    """Identical content hashes identically wherever it lives."""
    repository = PgmDatasetRepository(PgmImageRepository())
    records = _records(toy_dataset)
    first = repository.save(tmp_path / "a", toy_dataset, records, DatasetSpec())
    second = repository.save(tmp_path / "b", toy_dataset, records, DatasetSpec())
    assert first == second
    with pytest.raises(ArtifactExistsError):
        repository.save(tmp_path / "a", toy_dataset, records, DatasetSpec())
    assert (
        repository.save(tmp_path / "a", toy_dataset, records, DatasetSpec(), True)
        == first
    )


def test_dataset_manifest_errors(tmp_path: Path, toy_dataset: ImageDataset) -> None:
    """An unknown class name is reported with its line."""
    repository = PgmDatasetRepository(PgmImageRepository())
    repository.save(tmp_path / "ds", toy_dataset, _records(toy_dataset), DatasetSpec())
    manifest = tmp_path / "ds" / MANIFEST
    lines = manifest.read_text().splitlines()
    lines[2] = lines[2].replace(",normal,", ",severe,")
    manifest.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as info:
        repository.load(tmp_path / "ds")
    assert info.value.line == 3
    with pytest.raises(ParseError):
        repository.load(tmp_path / "nowhere")


def test_run_artifacts(tmp_path: Path, toy_dataset: ImageDataset) -> None:
    """Metrics, manifest, checkpoints and images of a finished run."""
    config = TrainConfig(
        learning_rate=0.01,
        batch_size=12,
        epochs=2,
        num_prototypes=4,
        latent_dim=8,
        hidden_sizes=(16, 12, 10),
        snapshot_epochs=[0],
        seed=1,
    )
    result = train(toy_dataset, config, dataset_hash="feed")
    checkpoints = BinaryCheckpointRepository()
    runs = FileRunRepository(PgmImageRepository(), checkpoints)
    run_dir = runs.prepare_run(tmp_path / "run")
    record = runs.save_run(run_dir, result, 8, 8)

    assert record.checkpoints == {"final": FINAL_CHECKPOINT, "best": BEST_CHECKPOINT}
    for name in (METRICS, RUN_MANIFEST, FINAL_CHECKPOINT, BEST_CHECKPOINT):
        assert (run_dir / name).exists()
    for epoch in (0, 2):
        for j in range(4):
            assert (run_dir / f"proto_epoch{epoch}_p{j}.pgm").exists()
    assert (run_dir / "neighbor_final_p3.pgm").exists()

    assert runs.load_metrics(run_dir) == result.record.epochs
    assert runs.load_manifest(run_dir) == result.record.manifest
    assert runs.load_manifest(tmp_path) is None
    final = checkpoints.load(run_dir / FINAL_CHECKPOINT)
    assert final.state is not None and final.state.epoch == 2
    written = runs.read_json(run_dir / RUN_MANIFEST)
    assert written["checkpoint_hashes"]["final"] == final.digest
    assert written["invocation"] is None
    assert checkpoints.load(run_dir / BEST_CHECKPOINT).state is None


def test_sweep_table(tmp_path: Path) -> None:
    """One CSV row per weight; missing statistics stay empty."""
    runs = FileRunRepository(PgmImageRepository(), BinaryCheckpointRepository())
    rows = [
        SweepRow(
            lambda_pd=0.0,
            runs=2,
            completed=2,
            complete=True,
            accuracy_mean=0.9,
            accuracy_std=0.01,
            psi_n_mean=0.5,
            psi_n_std=0.1,
            psi_c_mean=0.6,
            psi_c_std=0.2,
        ),
        SweepRow(
            lambda_pd=500.0,
            runs=2,
            completed=0,
            complete=False,
            accuracy_mean=None,
            accuracy_std=None,
            psi_n_mean=None,
            psi_n_std=None,
            psi_c_mean=None,
            psi_c_std=None,
        ),
    ]
    path = runs.save_table(tmp_path, rows)
    frame = FileRepository().read_frame(path)
    assert frame["lambda_pd"].tolist() == [0.0, 500.0]
    assert frame["accuracy_mean"].iloc[0] == 0.9
    assert np.isnan(frame["accuracy_mean"].iloc[1])
