"""CSV waveform import and labeling of imported waveforms."""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from src.core.errors import ParseError
from src.schemas.signals import Modality
from src.signalkit.labels import label_for
from src.signalkit.peaks import extract_events
from src.signalkit.types import LabeledSegment, Waveform

SAMPLING_TOLERANCE = 0.01


def _is_number(cell: object) -> bool:
    return not pd.isna(pd.to_numeric(pd.Series([cell]), errors="coerce")[0])


def import_csv(path: Union[str, Path]) -> list[Waveform]:
    """Read ``time,value[,value...]`` rows into one waveform per value column.

    A non-numeric first row is treated as a header and skipped. The sampling
    rate is inferred from the median time step.

    Args:
        path: CSV file.

    Returns:
        list[Waveform]: One waveform per value column.

    Raises:
        ParseError: On non-numeric cells, non-increasing times or steps that
            deviate from the median by more than 1%; the message carries the
            offending file line.
    """
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False)
    except FileNotFoundError as e:
        raise ParseError(f"{path}: no such file") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"{path}: {e}") from e

    first_line = 1
    if frame.shape[0] > 0 and not _is_number(frame.iat[0, 0]):
        frame = frame.iloc[1:]
        first_line = 2
    if frame.shape[1] < 2:
        raise ParseError(
            f"{path}: expected a time column and at least one value column"
        )
    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.all(np.isfinite(values), axis=1))
    if bad.size:
        raise ParseError("non-numeric or missing value", line=first_line + int(bad[0]))
    if values.shape[0] < 2:
        raise ParseError(f"{path}: needs at least two samples")

    steps = np.diff(values[:, 0])
    backwards = np.flatnonzero(steps <= 0)
    if backwards.size:
        raise ParseError(
            "time is not increasing", line=first_line + int(backwards[0]) + 1
        )
    dt = float(np.median(steps))
    irregular = np.flatnonzero(np.abs(steps - dt) > SAMPLING_TOLERANCE * dt)
    if irregular.size:
        raise ParseError(
            f"irregular sampling step {steps[irregular[0]]:g} s (median {dt:g} s)",
            line=first_line + int(irregular[0]) + 1,
        )
    fs = 1.0 / dt
    return [Waveform(values[:, col], fs) for col in range(1, values.shape[1])]


def label_imported(waveform: Waveform, modality: Modality) -> Optional[LabeledSegment]:
    """Detect events in an imported waveform and label it.

    Returns:
        Optional[LabeledSegment]: The labeled segment, or None when detection
            flags the waveform.
    """
    peaks = extract_events(waveform, modality)
    label = None if peaks.flagged else label_for(modality, peaks.event_times)
    if label is None:
        return None
    return LabeledSegment(
        waveform=waveform,
        modality=modality,
        label=label,
        event_times=peaks.event_times,
        source="imported",
    )
