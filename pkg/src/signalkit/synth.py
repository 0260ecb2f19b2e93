"""Seeded synthetic ECG and respiration segments.

Each generator draws a segment for a requested class, then runs the same event
detection and labeling used on real data. A segment whose detected label does
not match is redrawn from the next attempt stream, up to ten attempts.
"""

from typing import Callable

import numpy as np

from src.core.errors import GenerationError
from src.core.seeding import Stream, rng_for
from src.core.utils import get_logger
from src.schemas.signals import Modality, SeverityLabel
from src.signalkit.labels import label_for
from src.signalkit.peaks import extract_events
from src.signalkit.types import LabeledSegment, Waveform

logger = get_logger()

MAX_ATTEMPTS = 10
ECG_DURATION = 15.0
RESP_DURATION = 60.0
QRS_WIDTH = 0.012
BASELINE_RR = (0.45, 0.55)
RR_JITTER = 0.005
TAPER = (0.6, 0.3, 0.1)
ECG_RATE_BANDS = {
    SeverityLabel.MILD: (80.0, 100.0),
    SeverityLabel.MODERATE_SEVERE: (40.0, 80.0),
}
RESP_PERIOD = (1.0, 3.0)
RESP_AMPLITUDE_JITTER = 0.1
RESP_GAP_BANDS = {
    SeverityLabel.MILD: (4.0, 6.0),
    SeverityLabel.MODERATE_SEVERE: (6.5, 12.0),
}

Drawer = Callable[[SeverityLabel, np.random.Generator, float, float], np.ndarray]


def ricker(t: np.ndarray, width: float = QRS_WIDTH) -> np.ndarray:
    """Unit-height negative second derivative of a Gaussian."""
    x = (t / width) ** 2
    return (1.0 - x) * np.exp(-x / 2.0)


def _beat_times(label: SeverityLabel, rng: np.random.Generator) -> np.ndarray:
    baseline = rng.uniform(*BASELINE_RR)
    center = ECG_DURATION / 2
    if label is SeverityLabel.NORMAL:
        central = baseline + rng.normal(0.0, RR_JITTER)
        taper: list[float] = []
    else:
        low, high = ECG_RATE_BANDS[label]
        # rate in (low, high]
        central = 60.0 / (high - rng.uniform(0.0, high - low))
        taper = [baseline + weight * (central - baseline) for weight in TAPER]

    def side() -> list[float]:
        intervals = list(taper)
        while sum(intervals) < center + 1.0:
            intervals.append(baseline + rng.normal(0.0, RR_JITTER))
        return intervals

    right = center + central / 2 + np.concatenate([[0.0], np.cumsum(side())])
    left = center - central / 2 - np.concatenate([[0.0], np.cumsum(side())])
    return np.concatenate([left[::-1], right])


def draw_ecg(
    label: SeverityLabel, rng: np.random.Generator, fs: float, noise_sigma: float
) -> np.ndarray:
    """Raw ECG samples: a QRS template at every beat plus white noise."""
    t = np.arange(int(round(ECG_DURATION * fs))) / fs
    samples = np.zeros_like(t)
    for beat in _beat_times(label, rng):
        if -0.1 < beat < ECG_DURATION + 0.1:
            samples += ricker(t - beat)
    return samples + rng.normal(0.0, noise_sigma, size=t.size)


def draw_resp(
    label: SeverityLabel, rng: np.random.Generator, fs: float, noise_sigma: float
) -> np.ndarray:
    """Raw respiration samples: whole sine cycles with an optional flat pause.

    The pause is sized so that the gap between the breath peaks around it is
    the drawn inter-breath interval, and it sits near the segment center.
    """
    n = int(round(RESP_DURATION * fs))
    period = rng.uniform(*RESP_PERIOD)
    pause = 0.0
    if label is not SeverityLabel.NORMAL:
        pause = rng.uniform(*RESP_GAP_BANDS[label]) - period
    cycles_before = int(np.floor((RESP_DURATION / 2 - pause / 2) / period))
    pieces: list[np.ndarray] = []
    cycle_t = np.arange(int(round(period * fs))) / fs
    length = 0
    cycle = 0
    while length < n:
        if pause > 0 and cycle == cycles_before:
            flat = np.zeros(int(round(pause * fs)))
            pieces.append(flat)
            length += flat.size
        amplitude = 1.0 + rng.uniform(-RESP_AMPLITUDE_JITTER, RESP_AMPLITUDE_JITTER)
        wave = amplitude * np.sin(2.0 * np.pi * cycle_t / period)
        pieces.append(wave)
        length += wave.size
        cycle += 1
    samples = np.concatenate(pieces)[:n]
    return samples + rng.normal(0.0, noise_sigma, size=n)


def _generate(
    modality: Modality,
    draw: Drawer,
    label: SeverityLabel,
    seed: int,
    fs: float,
    noise_sigma: float,
) -> LabeledSegment:
    for attempt in range(MAX_ATTEMPTS):
        rng = rng_for(seed, Stream.ATTEMPT, attempt)
        waveform = Waveform(draw(label, rng, fs, noise_sigma), fs)
        peaks = extract_events(waveform, modality)
        detected = None if peaks.flagged else label_for(modality, peaks.event_times)
        if detected is label:
            return LabeledSegment(
                waveform=waveform,
                modality=modality,
                label=label,
                event_times=peaks.event_times,
                seed=seed,
                attempt=attempt,
            )
        logger.debug(
            "%s seed %s attempt %s: requested %s, detected %s",
            modality.value,
            seed,
            attempt,
            label.slug,
            detected.slug if detected is not None else "flagged",
        )
    raise GenerationError(
        f"{modality.value} {label.slug} seed {seed}: label did not round-trip "
        f"in {MAX_ATTEMPTS} attempts"
    )


def gen_ecg(
    label: SeverityLabel, seed: int, fs: float = 250.0, noise_sigma: float = 0.05
) -> LabeledSegment:
    """Generate a 15 s ECG segment of the requested class.

    Normal segments beat at a baseline interval of 0.45 to 0.55 s. Event segments
    hold one centered interval at a rate drawn inside the class band with
    tapering neighbor intervals.

    Args:
        label: Requested class.
        seed: Segment seed.
        fs: Sampling rate in Hz.
        noise_sigma: Additive noise level.

    Returns:
        LabeledSegment: Segment whose detected label equals ``label``.

    Raises:
        GenerationError: If ten attempts fail the label round trip.
    """
    return _generate(Modality.ECG, draw_ecg, label, seed, fs, noise_sigma)


def gen_resp(
    label: SeverityLabel, seed: int, fs: float = 50.0, noise_sigma: float = 0.05
) -> LabeledSegment:
    """Generate a 60 s respiration segment of the requested class.

    Args:
        label: Requested class.
        seed: Segment seed.
        fs: Sampling rate in Hz.
        noise_sigma: Additive noise level.

    Returns:
        LabeledSegment: Segment whose detected label equals ``label``.

    Raises:
        GenerationError: If ten attempts fail the label round trip.
    """
    return _generate(Modality.RESPIRATION, draw_resp, label, seed, fs, noise_sigma)


def generate_segment(
    modality: Modality, label: SeverityLabel, seed: int, noise_sigma: float = 0.05
) -> LabeledSegment:
    """Generate a segment of either modality at its default rate."""
    if modality is Modality.ECG:
        return gen_ecg(label, seed, noise_sigma=noise_sigma)
    return gen_resp(label, seed, noise_sigma=noise_sigma)
