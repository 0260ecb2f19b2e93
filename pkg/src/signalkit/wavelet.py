"""Complex Morlet continuous wavelet transform."""

from typing import Sequence

import numpy as np
from scipy import signal

from src.core.errors import InputValidationError
from src.signalkit.types import Waveform

OMEGA0 = 6.0
SUPPORT = 5.0


def morlet_kernel(freq: float, fs: float) -> np.ndarray:
    """Sampled unit-energy Morlet wavelet whose pseudo-frequency is ``freq``.

    Args:
        freq: Pseudo-frequency in Hz; the scale is ``6 / (2 * pi * freq)`` s.
        fs: Sampling rate in Hz.

    Returns:
        np.ndarray: Complex kernel of odd length covering ``±5`` scales.
    """
    scale = OMEGA0 / (2.0 * np.pi * freq)
    half = max(int(np.ceil(SUPPORT * scale * fs)), 1)
    tau = np.arange(-half, half + 1) / (fs * scale)
    kernel = np.pi**-0.25 * np.exp(1j * OMEGA0 * tau) * np.exp(-(tau**2) / 2.0)
    return kernel / np.sqrt(np.sum(np.abs(kernel) ** 2))


def morlet_cwt(w: Waveform, freqs: Sequence[float]) -> np.ndarray:
    """Magnitude of the Morlet transform at the given pseudo-frequencies.

    Args:
        w: Input waveform.
        freqs: Pseudo-frequencies in Hz, each inside ``(0, fs / 2)``.

    Returns:
        np.ndarray: ``len(freqs)×len(w)`` magnitudes, zero-padded at the edges.

    Raises:
        InputValidationError: If a frequency lies outside ``(0, fs / 2)``.
    """
    rows = []
    for freq in freqs:
        if not 0 < freq < w.fs / 2:
            raise InputValidationError(
                f"morlet_cwt: frequency {freq} Hz outside (0, {w.fs / 2})"
            )
        kernel = morlet_kernel(freq, w.fs)
        rows.append(np.abs(signal.fftconvolve(w.samples, kernel, mode="same")))
    return np.vstack(rows) if rows else np.zeros((0, w.samples.size))
