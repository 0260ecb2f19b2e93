"""Signal value types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import InputValidationError, NumericError
from src.schemas.signals import Modality, SeverityLabel

FloatArray = np.ndarray


def _frozen(values: ArrayLike, ndim: int, what: str) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise InputValidationError(
            f"{what}: expected {ndim}-d data, got {array.ndim}-d"
        )
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{what}: non-finite sample")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled signal.

    Attributes:
        samples: Finite sample values, at least two.
        fs: Sampling rate in Hz.
    """

    samples: FloatArray
    fs: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _frozen(self.samples, 1, "waveform"))
        if not self.fs > 0:
            raise InputValidationError(f"waveform: sampling rate {self.fs} must be > 0")
        if self.samples.size < 2:
            raise InputValidationError("waveform: needs at least two samples")

    def with_samples(self, samples: ArrayLike) -> Waveform:
        """Return a waveform with new samples and the same rate."""
        return Waveform(np.asarray(samples), self.fs)


@dataclass(frozen=True, eq=False)
class PeakResult:
    """Detected events of one waveform.

    Attributes:
        event_times: Peak times in seconds, ascending.
        flagged: Fewer than two peaks were found; the segment is unusable.
    """

    event_times: FloatArray
    flagged: bool


@dataclass(frozen=True, eq=False)
class LabeledSegment:
    """Fixed-length waveform with its clinical class.

    Attributes:
        waveform: Raw samples.
        modality: Waveform kind.
        label: Class derived from ``event_times``.
        event_times: Detected peak times in seconds.
        source: ``synthetic`` or ``imported``.
        seed: Generator seed of a synthetic segment.
        attempt: Generator attempt that passed the label round trip.
    """

    waveform: Waveform
    modality: Modality
    label: SeverityLabel
    event_times: FloatArray
    source: Literal["synthetic", "imported"] = "synthetic"
    seed: Optional[int] = None
    attempt: int = 0


@dataclass(frozen=True, eq=False)
class ImageExample:
    """Waveform rendered as a monochrome image.

    Attributes:
        pixels: ``H×W`` intensities in ``[0, 1]``.
        label: Class of the source segment, if known.
    """

    pixels: FloatArray
    label: Optional[SeverityLabel] = None

    def __post_init__(self) -> None:
        pixels = _frozen(self.pixels, 2, "image")
        if np.any(pixels < 0.0) or np.any(pixels > 1.0):
            raise InputValidationError("image: pixels must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        """Row count."""
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        """Column count."""
        return int(self.pixels.shape[1])

    def flatten(self) -> FloatArray:
        """Row-major pixel vector of length ``H * W``."""
        return self.pixels.reshape(-1)
