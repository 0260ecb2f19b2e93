"""Base repository module for file artifacts."""

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Iterable, Union

import pandas as pd
from pydantic import BaseModel

from src.core.errors import ArtifactExistsError, ParseError

PathLike = Union[str, Path]


class FileRepository:
    """Base repository class for writing and reading artifact files.

    Every write goes to a temporary sibling first and is renamed into place,
    so a reader never sees a half-written file. Text artifacts carry no
    timestamps; identical inputs produce byte-identical files.
    """

    def prepare_dir(self, path: PathLike, force: bool = False) -> Path:
        """Create an output directory.

        Args:
            path: Directory to create.
            force: Allow writing into a non-empty directory.

        Returns:
            Path: The directory.

        Raises:
            ArtifactExistsError: If the directory is non-empty and not forced.
        """
        directory = Path(path)
        if directory.exists() and any(directory.iterdir()) and not force:
            raise ArtifactExistsError(
                f"{directory} is not empty; pass --force to overwrite"
            )
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def write_bytes(self, path: PathLike, data: bytes) -> Path:
        """Atomically write a file.

        Args:
            path: Destination.
            data: File content.

        Returns:
            Path: The destination.
        """
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(f".{target.name}.tmp")
        tmp.write_bytes(data)
        os.replace(tmp, target)
        return target

    def write_json(self, path: PathLike, document: Union[BaseModel, Any]) -> Path:
        """Write a pydantic model or plain document as sorted, indented JSON."""
        if isinstance(document, BaseModel):
            document = document.model_dump(mode="json")
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
        return self.write_bytes(path, text.encode("utf-8"))

    def read_json(self, path: PathLike) -> Any:
        """Read a JSON document.

        Raises:
            ParseError: If the file is missing or not valid JSON.
        """
        try:
            return json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ParseError(f"{path}: no such file") from e
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e.msg}", line=e.lineno) from e

    def write_frame(self, path: PathLike, frame: pd.DataFrame) -> Path:
        """Write a table as CSV with a header row and no index."""
        text = frame.to_csv(index=False, lineterminator="\n")
        return self.write_bytes(path, text.encode("utf-8"))

    def read_frame(self, path: PathLike) -> pd.DataFrame:
        """Read a CSV table written by ``write_frame``.

        Raises:
            ParseError: If the file is missing or malformed.
        """
        try:
            return pd.read_csv(path, float_precision="round_trip")
        except FileNotFoundError as e:
            raise ParseError(f"{path}: no such file") from e
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ParseError(f"{path}: {e}") from e


def blob_hash(data: bytes) -> str:
    """Git blob id of a byte string."""
    header = f"blob {len(data)}\0".encode("ascii")
    return hashlib.sha1(header + data).hexdigest()


def content_hash(root: PathLike, files: Iterable[PathLike]) -> str:
    """Order-independent hash over files relative to ``root``.

    Each file contributes ``<blob id> <relative path>``; lines are sorted and
    hashed together, so the result names the content, not the write order.
    """
    base = Path(root)
    lines = sorted(
        f"{blob_hash(Path(f).read_bytes())} {Path(f).relative_to(base).as_posix()}"
        for f in files
    )
    return hashlib.sha1("\n".join(lines).encode("utf-8")).hexdigest()
