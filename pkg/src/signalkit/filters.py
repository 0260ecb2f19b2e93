"""Band-pass filtering and amplitude normalization."""

import numpy as np
from scipy import signal

from src.core.errors import InputValidationError
from src.signalkit.types import Waveform

REFERENCE_TAPS = 501
REFERENCE_RATE = 250.0
VARIANCE_FLOOR = 1e-12


def fir_taps(fs: float, lo: float, hi: float) -> np.ndarray:
    """Hamming-windowed sinc band-pass taps.

    The length is 501 taps at 250 Hz and scales with the sampling rate; it is
    always odd so the filter delay is a whole number of samples.
    """
    numtaps = max(int(round(REFERENCE_TAPS * fs / REFERENCE_RATE)), 3)
    numtaps += 1 - numtaps % 2
    return signal.firwin(numtaps, [lo, hi], pass_zero=False, window="hamming", fs=fs)


def bandpass(w: Waveform, lo: float = 3.0, hi: float = 45.0) -> Waveform:
    """Zero-phase FIR band-pass filter.

    The mean is removed, the signal is mirror-padded by half the filter length
    and the linear-phase taps are applied with the group delay compensated, so
    the output is aligned with and as long as the input.

    Args:
        w: Input waveform.
        lo: Lower cut-off in Hz.
        hi: Upper cut-off in Hz.

    Returns:
        Waveform: Filtered waveform.

    Raises:
        InputValidationError: Unless ``0 < lo < hi < fs / 2``.
    """
    if not 0 < lo < hi < w.fs / 2:
        raise InputValidationError(
            f"bandpass: band [{lo}, {hi}] Hz must satisfy 0 < lo < hi < {w.fs / 2}"
        )
    taps = fir_taps(w.fs, lo, hi)
    half = taps.size // 2
    centered = signal.detrend(w.samples, type="constant")
    padded = np.pad(centered, half, mode="reflect")
    return w.with_samples(signal.fftconvolve(padded, taps, mode="valid"))


def normalize(w: Waveform) -> Waveform:
    """Zero-mean, unit-variance copy; a constant waveform becomes all zeros."""
    centered = w.samples - w.samples.mean()
    variance = centered.var()
    if variance < VARIANCE_FLOOR:
        return w.with_samples(np.zeros_like(centered))
    return w.with_samples(centered / np.sqrt(variance))
