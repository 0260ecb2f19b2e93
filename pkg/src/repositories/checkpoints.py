"""Binary model checkpoints.

Layout, little-endian: ``b"PDIV"``, u32 format version, u32 ``p q m K``, u32
hidden-layer count followed by the hidden widths, u64 init seed. Then every
parameter in checkpoint order as u32 rank, u32 extents and float64 data. An
optional trailer (u8 flag, u64 Adam step, u32 epoch, then the first and second
Adam moments in parameter order) lets training resume exactly.
"""

import struct
from abc import abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol

import numpy as np

from src.core.config import settings
from src.core.errors import DimensionError, ParseError
from src.ndgrad import Tensor
from src.repositories.base import FileRepository, PathLike, blob_hash
from src.schemas.model import ModelConfig
from src.services.optim import AdamState
from src.services.protomodel import PrototypeModel, parameter_names, parameter_shapes
from src.services.trainer import TrainState

MAGIC = b"PDIV"


@dataclass(frozen=True)
class Checkpoint:
    """Decoded checkpoint.

    Attributes:
        model: Model parameters and extents.
        state: Optimizer state and epoch, when the checkpoint carries them.
        digest: Blob hash of the encoded bytes.
    """

    model: PrototypeModel
    state: Optional[TrainState] = None
    digest: str = ""


def encode_checkpoint(
    model: PrototypeModel, state: Optional[TrainState] = None
) -> bytes:
    """Serialize a model and optionally its training state."""
    config = model.config
    chunks = [
        MAGIC,
        struct.pack(
            "<5I",
            settings.CHECKPOINT_FORMAT_VERSION,
            config.input_dim,
            config.latent_dim,
            config.num_prototypes,
            config.num_classes,
        ),
        struct.pack(
            f"<I{len(config.hidden_sizes)}I",
            len(config.hidden_sizes),
            *config.hidden_sizes,
        ),
        struct.pack("<Q", config.seed),
    ]
    for name in parameter_names(config):
        array = model.params[name].data
        chunks.append(struct.pack(f"<I{array.ndim}I", array.ndim, *array.shape))
        chunks.append(array.astype("<f8").tobytes())
    if state is None:
        chunks.append(struct.pack("<B", 0))
    else:
        chunks.append(struct.pack("<BQI", 1, state.adam.step, state.epoch))
        for moments in (state.adam.m, state.adam.v):
            for name in parameter_names(config):
                chunks.append(np.asarray(moments[name], dtype="<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def unpack(self, fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        if self._pos + size > len(self._data):
            raise ParseError(f"checkpoint: truncated at byte {self._pos}")
        values = struct.unpack_from(fmt, self._data, self._pos)
        self._pos += size
        return values

    def floats(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        (raw,) = self.unpack(f"<{count * 8}s")
        return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)

    @property
    def exhausted(self) -> bool:
        return self._pos == len(self._data)


def decode_checkpoint(data: bytes) -> Checkpoint:
    """Parse a checkpoint.

    Raises:
        ParseError: On a bad magic, an unknown version or a truncated file.
        DimensionError: If a stored shape disagrees with the header extents.
    """
    reader = _Reader(data)
    (magic,) = reader.unpack("<4s")
    if magic != MAGIC:
        raise ParseError(f"checkpoint: bad magic {magic!r}")
    version, p, q, m, k = reader.unpack("<5I")
    if version != settings.CHECKPOINT_FORMAT_VERSION:
        raise ParseError(f"checkpoint: unsupported format version {version}")
    (n_hidden,) = reader.unpack("<I")
    hidden = reader.unpack(f"<{n_hidden}I")
    (seed,) = reader.unpack("<Q")
    try:
        config = ModelConfig(
            input_dim=p,
            latent_dim=q,
            num_prototypes=m,
            num_classes=k,
            hidden_sizes=hidden,
            seed=seed,
        )
    except ValueError as e:
        raise ParseError(f"checkpoint: invalid header: {e}") from e

    shapes = parameter_shapes(config)
    params: dict[str, Tensor] = {}
    for name, expected in shapes.items():
        (ndim,) = reader.unpack("<I")
        shape = tuple(reader.unpack(f"<{ndim}I"))
        if shape != expected:
            raise DimensionError(
                f"checkpoint: {name} stored as {list(shape)}, "
                f"expected {list(expected)}"
            )
        params[name] = Tensor.wrap(reader.floats(shape))
    model = PrototypeModel(config, params)

    (flag,) = reader.unpack("<B")
    state = None
    if flag:
        step, epoch = reader.unpack("<QI")
        m_moments = {name: reader.floats(shape) for name, shape in shapes.items()}
        v_moments = {name: reader.floats(shape) for name, shape in shapes.items()}
        adam = AdamState(step=step, m=m_moments, v=v_moments)
        state = TrainState(model=model, adam=adam, epoch=epoch)
    if not reader.exhausted:
        raise ParseError("checkpoint: trailing bytes")
    return Checkpoint(model=model, state=state, digest=blob_hash(data))


class CheckpointRepository(Protocol):
    """Interface for checkpoint persistence."""

    @abstractmethod
    def save(
        self, path: PathLike, model: PrototypeModel, state: Optional[TrainState] = None
    ) -> Path:
        """Write a checkpoint.

        Args:
            path: Destination file.
            model: Model to store.
            state: Training state to store alongside, for resuming.

        Returns:
            Path: The written file.
        """
        ...

    @abstractmethod
    def load(self, path: PathLike) -> Checkpoint:
        """Read a checkpoint.

        Args:
            path: Source file.

        Returns:
            Checkpoint: Model and, if stored, training state.

        Raises:
            ParseError: If the file is missing or malformed.
        """
        ...


class BinaryCheckpointRepository(FileRepository, CheckpointRepository):
    """Checkpoint repository using the ``PDIV`` binary layout."""

    def save(
        self, path: PathLike, model: PrototypeModel, state: Optional[TrainState] = None
    ) -> Path:
        return self.write_bytes(path, encode_checkpoint(model, state))

    def load(self, path: PathLike) -> Checkpoint:
        try:
            data = Path(path).read_bytes()
        except FileNotFoundError as e:
            raise ParseError(f"{path}: no such file") from e
        return decode_checkpoint(data)
