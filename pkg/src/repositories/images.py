"""Binary PGM image codec."""

from abc import abstractmethod
from pathlib import Path
from typing import Protocol

import numpy as np

from src.core.errors import InputValidationError, ParseError
from src.repositories.base import FileRepository, PathLike

MAXVAL = 255


def encode_pgm(pixels: np.ndarray) -> bytes:
    """Encode ``H×W`` intensities in ``[0, 1]`` as an 8-bit P5 image."""
    if pixels.ndim != 2:
        raise InputValidationError(f"pgm: expected a 2-d image, got {pixels.ndim}-d")
    if np.any(pixels < 0.0) or np.any(pixels > 1.0):
        raise InputValidationError("pgm: pixels must lie in [0, 1]")
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n{MAXVAL}\n".encode("ascii")
    body = np.rint(pixels * MAXVAL).astype(np.uint8).tobytes()
    return header + body


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode an 8-bit P5 image to intensities in ``[0, 1]``.

    Raises:
        ParseError: If the header or the pixel payload is malformed.
    """
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("pgm: truncated header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ParseError(f"pgm: unsupported magic {tokens[0]!r}")
    try:
        width, height, maxval = (int(token) for token in tokens[1:])
    except ValueError as e:
        raise ParseError("pgm: non-numeric header field") from e
    if width < 1 or height < 1 or not 0 < maxval < 256:
        raise ParseError(f"pgm: unsupported geometry {width}x{height}/{maxval}")
    body = data[pos + 1 : pos + 1 + width * height]
    if len(body) != width * height:
        raise ParseError(f"pgm: expected {width * height} pixels, got {len(body)}")
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / maxval


class ImageRepository(Protocol):
    """Interface for image persistence."""

    @abstractmethod
    def save(self, path: PathLike, pixels: np.ndarray) -> Path:
        """Write an image.

        Args:
            path: Destination file.
            pixels: ``H×W`` intensities in ``[0, 1]``.

        Returns:
            Path: The written file.
        """
        ...

    @abstractmethod
    def load(self, path: PathLike) -> np.ndarray:
        """Read an image.

        Args:
            path: Source file.

        Returns:
            np.ndarray: ``H×W`` intensities in ``[0, 1]``.
        """
        ...


class PgmImageRepository(FileRepository, ImageRepository):
    """Image repository storing 8-bit binary PGM files."""

    def save(self, path: PathLike, pixels: np.ndarray) -> Path:
        return self.write_bytes(path, encode_pgm(np.clip(pixels, 0.0, 1.0)))

    def load(self, path: PathLike) -> np.ndarray:
        try:
            data = Path(path).read_bytes()
        except FileNotFoundError as e:
            raise ParseError(f"{path}: no such file") from e
        return decode_pgm(data)
