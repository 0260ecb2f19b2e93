"""Immutable dense tensors of 64-bit reals."""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.errors import DimensionError, NumericError

FloatArray = NDArray[np.float64]


class Tensor:
    """Shape-tagged, row-major array of finite float64 values.

    The wrapped buffer is read-only, so a Tensor can be shared freely between
    threads and models.

    Args:
        data: Anything ``numpy.array`` accepts.

    Raises:
        DimensionError: If any extent is zero.
        NumericError: If any element is NaN or infinite.
    """

    __slots__ = ("_array",)

    def __init__(self, data: ArrayLike):
        array = np.array(data, dtype=np.float64, order="C")
        self._array = _freeze(array)

    @classmethod
    def wrap(cls, array: np.ndarray) -> Tensor:
        """Wrap an array without copying when it already is C-ordered float64.

        Zero-dimensional arrays stay zero-dimensional.

        The caller hands over ownership: the array is made read-only.
        """
        tensor = cls.__new__(cls)
        tensor._array = _freeze(np.asarray(array, dtype=np.float64, order="C"))
        return tensor

    @property
    def shape(self) -> tuple[int, ...]:
        """Extents of every axis."""
        return tuple(self._array.shape)

    @property
    def data(self) -> FloatArray:
        """Read-only view on the values."""
        return self._array

    @property
    def size(self) -> int:
        """Number of elements."""
        return int(self._array.size)

    def numpy(self) -> FloatArray:
        """Return a writable copy of the values."""
        return self._array.copy()

    def item(self) -> float:
        """Return the single value of a one-element tensor."""
        if self._array.size != 1:
            raise DimensionError(f"item() needs one element, got shape {self.shape}")
        return float(self._array.reshape(-1)[0])

    def bitwise_equal(self, other: Tensor) -> bool:
        """Compare shape and raw bytes."""
        return self.shape == other.shape and self._array.tobytes() == (
            other._array.tobytes()
        )

    def __array__(self, dtype: Any = None, copy: Any = None) -> np.ndarray:
        return self._array if dtype is None else self._array.astype(dtype)

    def __len__(self) -> int:
        return self.shape[0] if self.shape else 1

    def __repr__(self) -> str:
        return f"Tensor(shape={list(self.shape)})"


def _freeze(array: np.ndarray) -> np.ndarray:
    if any(extent <= 0 for extent in array.shape):
        raise DimensionError(f"extents must be positive, got {list(array.shape)}")
    if not np.all(np.isfinite(array)):
        raise NumericError("tensor contains non-finite values")
    array.flags.writeable = False
    return array


def zeros(shape: Sequence[int]) -> Tensor:
    """Tensor of zeros."""
    return Tensor.wrap(np.zeros(tuple(shape)))


def ones(shape: Sequence[int]) -> Tensor:
    """Tensor of ones."""
    return Tensor.wrap(np.ones(tuple(shape)))


def eye(n: int) -> Tensor:
    """Identity matrix."""
    return Tensor.wrap(np.eye(n))
