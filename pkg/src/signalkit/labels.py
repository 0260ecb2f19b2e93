"""Clinical severity labels from event times.

Both labelers return ``None`` for a segment with fewer than two events, which
callers treat as flagged. Repeated or non-finite event times are rejected.
"""

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import InputValidationError
from src.schemas.signals import Modality, SeverityLabel

NORMAL_MIN_BPM = 100.0
MILD_MIN_BPM = 80.0
MILD_MIN_IBI = 4.0
MILD_MAX_IBI = 6.0


def _intervals(event_times: ArrayLike) -> Optional[np.ndarray]:
    times = np.sort(np.asarray(event_times, dtype=np.float64))
    if not np.all(np.isfinite(times)):
        raise InputValidationError("labels: event times must be finite")
    if times.size < 2:
        return None
    intervals = np.diff(times)
    if np.any(intervals <= 0.0):
        raise InputValidationError("labels: event times must be strictly increasing")
    return intervals


def label_bradycardia(event_times: ArrayLike) -> Optional[SeverityLabel]:
    """Label a heart-beat train by its slowest beat.

    ``normal`` above 100 bpm, ``mild`` in (80, 100] bpm and
    ``moderate_severe`` at 80 bpm or below.
    """
    intervals = _intervals(event_times)
    if intervals is None:
        return None
    rate = 60.0 / float(intervals.max())
    if rate > NORMAL_MIN_BPM:
        return SeverityLabel.NORMAL
    if rate > MILD_MIN_BPM:
        return SeverityLabel.MILD
    return SeverityLabel.MODERATE_SEVERE


def label_apnea(event_times: ArrayLike) -> Optional[SeverityLabel]:
    """Label a breath train by its longest inter-breath interval.

    ``normal`` below 4 s, ``mild`` in [4, 6] s and ``moderate_severe`` above 6 s.
    """
    intervals = _intervals(event_times)
    if intervals is None:
        return None
    longest = float(intervals.max())
    if longest < MILD_MIN_IBI:
        return SeverityLabel.NORMAL
    if longest <= MILD_MAX_IBI:
        return SeverityLabel.MILD
    return SeverityLabel.MODERATE_SEVERE


def label_for(modality: Modality, event_times: ArrayLike) -> Optional[SeverityLabel]:
    """Apply the labeler of a modality."""
    if modality is Modality.ECG:
        return label_bradycardia(event_times)
    return label_apnea(event_times)
