"""Event detection.

ECG beats are found as maxima of the summed Morlet magnitude over the QRS band
(10 to 40 Hz). Breaths are maxima of the lightly smoothed normalized signal.
"""

from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import ndimage, signal, stats

from src.core.errors import InputValidationError
from src.schemas.signals import Modality
from src.signalkit.filters import bandpass, normalize
from src.signalkit.types import PeakResult, Waveform
from src.signalkit.wavelet import morlet_cwt

QRS_BAND: Sequence[float] = tuple(np.linspace(10.0, 40.0, 7))
ECG_REFRACTORY = 0.2
ECG_MAD_FACTOR = 3.0
ECG_RELATIVE_FLOOR = 0.35
RESP_REFRACTORY = 0.5
RESP_STD_FACTOR = 0.5
RESP_SMOOTHING = 0.1
FLAT_RANGE = 1e-12


def _flagged() -> PeakResult:
    return PeakResult(event_times=np.zeros(0), flagged=True)


def _peak_times(
    envelope: np.ndarray, threshold: float, refractory: float, fs: float
) -> PeakResult:
    distance = max(int(round(refractory * fs)), 1)
    indices, _ = signal.find_peaks(envelope, height=threshold, distance=distance)
    times = np.sort(indices / fs)
    return PeakResult(event_times=times, flagged=times.size < 2)


def detect_peaks(w: Waveform, modality: Modality) -> PeakResult:
    """Detect beats or breaths.

    ECG input is expected band-passed: the Morlet magnitudes over 10 to 40 Hz
    are summed and maxima above ``max(median + 3 * MAD, 0.35 * q99)`` at least
    200 ms apart are kept. Respiration input is expected normalized: the
    signal is smoothed with a 100 ms Gaussian and maxima above
    ``mean + 0.5 * std`` at least 500 ms apart are kept.

    Args:
        w: Waveform to search.
        modality: Waveform kind.

    Returns:
        PeakResult: Ascending event times; flagged when fewer than two.
    """
    if np.ptp(w.samples) < FLAT_RANGE:
        return _flagged()
    if modality is Modality.ECG:
        energy = morlet_cwt(w, QRS_BAND).sum(axis=0)
        threshold = max(
            float(np.median(energy))
            + ECG_MAD_FACTOR * float(stats.median_abs_deviation(energy)),
            ECG_RELATIVE_FLOOR * float(np.quantile(energy, 0.99)),
        )
        return _peak_times(energy, threshold, ECG_REFRACTORY, w.fs)
    smoothed = ndimage.gaussian_filter1d(
        w.samples, sigma=RESP_SMOOTHING * w.fs, mode="nearest"
    )
    threshold = float(smoothed.mean() + RESP_STD_FACTOR * smoothed.std())
    return _peak_times(smoothed, threshold, RESP_REFRACTORY, w.fs)


def extract_events(w: Waveform, modality: Modality) -> PeakResult:
    """Preprocess a raw waveform and detect its events.

    ECG is band-passed to 3 to 45 Hz first; respiration is normalized.
    """
    if modality is Modality.ECG:
        return detect_peaks(bandpass(w), modality)
    return detect_peaks(normalize(w), modality)


def scale_to_median_peak(w: Waveform, event_times: ArrayLike) -> Waveform:
    """Divide a waveform by the median height of its detected peaks.

    Raises:
        InputValidationError: If there are no events or the median height is
            not positive.
    """
    times = np.asarray(event_times, dtype=np.float64)
    if times.size == 0:
        raise InputValidationError("scale_to_median_peak: no events")
    index = np.clip(np.rint(times * w.fs).astype(np.int64), 0, w.samples.size - 1)
    height = float(np.median(w.samples[index]))
    if not height > 0:
        raise InputValidationError(
            f"scale_to_median_peak: median peak height {height} is not positive"
        )
    return w.with_samples(w.samples / height)
