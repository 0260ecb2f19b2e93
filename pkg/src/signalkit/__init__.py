"""Physiological waveform preprocessing, labeling, rendering and synthesis."""

from src.signalkit.filters import bandpass, normalize
from src.signalkit.csv_import import import_csv, label_imported
from src.signalkit.labels import label_apnea, label_bradycardia, label_for
from src.signalkit.peaks import detect_peaks, extract_events, scale_to_median_peak
from src.signalkit.raster import rasterize
from src.signalkit.synth import gen_ecg, gen_resp, generate_segment
from src.signalkit.types import ImageExample, LabeledSegment, PeakResult, Waveform
from src.signalkit.wavelet import morlet_cwt, morlet_kernel

__all__ = [
    "ImageExample",
    "LabeledSegment",
    "PeakResult",
    "Waveform",
    "bandpass",
    "detect_peaks",
    "extract_events",
    "gen_ecg",
    "gen_resp",
    "generate_segment",
    "import_csv",
    "label_apnea",
    "label_bradycardia",
    "label_for",
    "label_imported",
    "morlet_cwt",
    "morlet_kernel",
    "normalize",
    "rasterize",
    "scale_to_median_peak",
]
