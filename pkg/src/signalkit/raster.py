"""Waveform to image rendering."""

from typing import Optional

import numpy as np

from src.schemas.signals import RasterMode, SeverityLabel
from src.signalkit.types import ImageExample, Waveform

AMPLITUDE_LIMIT = 3.0


def amplitude_rows(amplitude: np.ndarray, height: int) -> np.ndarray:
    """Row of each amplitude; row 0 is ``+3`` and amplitudes are clipped to ``±3``."""
    clipped = np.clip(amplitude, -AMPLITUDE_LIMIT, AMPLITUDE_LIMIT)
    rows = np.floor((AMPLITUDE_LIMIT - clipped) / (2 * AMPLITUDE_LIMIT) * height)
    return np.minimum(rows.astype(np.int64), height - 1)


def rasterize(
    w: Waveform,
    height: int = 32,
    width: int = 64,
    mode: RasterMode = RasterMode.MEAN,
    label: Optional[SeverityLabel] = None,
) -> ImageExample:
    """Draw a normalized waveform as a one-pixel trace.

    Samples are binned into ``width`` columns. In ``mean`` mode each column is
    drawn at the row of its mean; in ``envelope`` mode it spans the rows of its
    maximum and minimum. Every column stroke is then stretched vertically until
    it touches the previous column's, so the trace is connected.

    Args:
        w: Normalized waveform.
        height: Image rows.
        width: Image columns.
        mode: Column rendering rule.
        label: Class attached to the image.

    Returns:
        ImageExample: Pixels are 1.0 on the trace and 0.0 elsewhere.
    """
    samples = w.samples
    if samples.size < width:
        grid = np.linspace(0, samples.size - 1, width)
        samples = np.interp(grid, np.arange(samples.size), samples)
    columns = np.array_split(samples, width)
    if mode is RasterMode.MEAN:
        highs = lows = np.array([column.mean() for column in columns])
    else:
        highs = np.array([column.max() for column in columns])
        lows = np.array([column.min() for column in columns])
    tops = amplitude_rows(highs, height)
    bottoms = amplitude_rows(lows, height)

    pixels = np.zeros((height, width))
    prev_top, prev_bottom = tops[0], bottoms[0]
    for col in range(width):
        top = min(tops[col], prev_bottom)
        bottom = max(bottoms[col], prev_top)
        pixels[top : bottom + 1, col] = 1.0
        prev_top, prev_bottom = tops[col], bottoms[col]
    return ImageExample(pixels=pixels, label=label)
