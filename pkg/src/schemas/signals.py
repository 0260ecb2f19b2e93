"""Signal and dataset schemas."""

from enum import Enum, IntEnum
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt


class Modality(str, Enum):
    """Physiological waveform kind."""

    ECG = "ecg"
    RESPIRATION = "respiration"


class SeverityLabel(IntEnum):
    """Segment class; the integer value is the class index."""

    NORMAL = 0
    MILD = 1
    MODERATE_SEVERE = 2

    @property
    def slug(self) -> str:
        """Lower-case name used in manifests and configs."""
        return self.name.lower()

    @classmethod
    def from_slug(cls, slug: str) -> "SeverityLabel":
        """Parse a lower-case class name."""
        return cls[slug.upper()]


class RasterMode(str, Enum):
    """How the samples of one image column become a vertical stroke."""

    MEAN = "mean"
    ENVELOPE = "envelope"


class DatasetSpec(BaseModel):
    """Synthetic dataset request.

    Attributes:
        modality: Waveform kind.
        counts: Segments per class name (``normal``, ``mild``, ``moderate_severe``).
        seed: Master generation seed.
        height: Image rows.
        width: Image columns.
        raster_mode: Column rendering rule.
        noise_sigma: Additive Gaussian noise level.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    modality: Modality = Modality.ECG
    counts: Dict[str, NonNegativeInt] = Field(
        default_factory=lambda: {"normal": 200, "mild": 200, "moderate_severe": 200}
    )
    seed: int = Field(default=0, ge=0)
    height: PositiveInt = 32
    width: PositiveInt = 64
    raster_mode: RasterMode = RasterMode.ENVELOPE
    noise_sigma: float = Field(default=0.05, ge=0)


class SegmentRecord(BaseModel):
    """One row of a dataset's ``manifest.csv``.

    Attributes:
        id: Image file stem.
        modality: Waveform kind.
        label: Class name.
        seed: Segment generator seed.
        attempt: Generator attempt that passed the label round trip.
        flagged: Whether event detection failed on the segment.
    """

    model_config = ConfigDict(frozen=True)

    id: str
    modality: Modality
    label: str
    seed: NonNegativeInt
    attempt: NonNegativeInt = 0
    flagged: bool = False
