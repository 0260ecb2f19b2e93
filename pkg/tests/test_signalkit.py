"""Waveform preprocessing, labeling, rendering and synthesis tests."""

from pathlib import Path

import numpy as np
import pytest

from src.core.errors import InputValidationError, NumericError, ParseError
from src.core.seeding import Stream, rng_for
from src.schemas.signals import Modality, RasterMode, SeverityLabel
from src.signalkit import (
    Waveform,
    bandpass,
    detect_peaks,
    extract_events,
    gen_ecg,
    gen_resp,
    generate_segment,
    import_csv,
    label_apnea,
    label_bradycardia,
    label_for,
    label_imported,
    morlet_cwt,
    morlet_kernel,
    normalize,
    rasterize,
    scale_to_median_peak,
)
from src.signalkit.raster import amplitude_rows
from src.signalkit.synth import ECG_DURATION, _beat_times, ricker

INTERIOR = slice(500, -500)


def _sine(freq: float, fs: float = 250.0, seconds: float = 15.0) -> Waveform:
    t = np.arange(int(seconds * fs)) / fs
    return Waveform(np.sin(2.0 * np.pi * freq * t), fs)


def _gain_db(freq: float, fs: float = 250.0) -> float:
    source = _sine(freq, fs)
    out = bandpass(source).samples[INTERIOR]
    ratio = np.sqrt(np.mean(out**2) / np.mean(source.samples[INTERIOR] ** 2))
    return 20.0 * np.log10(ratio)


def _match(detected: np.ndarray, truth: np.ndarray, tolerance: float) -> bool:
    """Every truth event has a detection nearby and vice versa."""
    if detected.size == 0 or truth.size == 0:
        return detected.size == truth.size
    recall = all(np.min(np.abs(detected - t)) <= tolerance for t in truth)
    precision = all(np.min(np.abs(truth - d)) <= tolerance for d in detected)
    return recall and precision


def test_waveform_validation() -> None:
    """Rate, length and finiteness are checked."""
    with pytest.raises(InputValidationError):
        Waveform(np.zeros(10), 0.0)
    with pytest.raises(InputValidationError):
        Waveform(np.zeros(1), 250.0)
    with pytest.raises(NumericError):
        Waveform(np.array([0.0, np.inf]), 250.0)
    w = Waveform([0.0, 1.0], 250.0)
    assert not w.samples.flags.writeable


def test_bandpass_passband_and_stopbands() -> None:
    """20 Hz passes within 3 dB; 0.5 Hz and 100 Hz lose at least 20 dB."""
    assert abs(_gain_db(20.0)) < 3.0
    assert _gain_db(0.5) <= -20.0
    assert _gain_db(100.0) <= -20.0


def test_bandpass_keeps_length_and_rejects_dc() -> None:
    """Output is as long as the input and a constant vanishes."""
    dc = Waveform(np.full(3750, 2.0), 250.0)
    out = bandpass(dc)
    assert out.samples.size == 3750
    assert np.mean(np.abs(out.samples)) < 1e-3 * 2.0


def test_bandpass_is_zero_phase() -> None:
    """A passband sine is not shifted."""
    source = _sine(15.0)
    out = bandpass(source)
    a, b = out.samples[INTERIOR], source.samples[INTERIOR]
    lag = int(np.argmax(np.correlate(a, b, "full"))) - (b.size - 1)
    assert lag == 0


def test_bandpass_band_validation() -> None:
    """The band must sit below Nyquist."""
    with pytest.raises(InputValidationError):
        bandpass(_sine(5.0), lo=3.0, hi=130.0)
    with pytest.raises(InputValidationError):
        bandpass(_sine(5.0), lo=10.0, hi=5.0)


def test_normalize() -> None:
    """Zero mean, unit variance, affine invariance and the constant case."""
    source = _sine(1.0)
    out = normalize(source).samples
    assert abs(out.mean()) < 1e-12
    assert out.var() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(normalize(Waveform(out, 250.0)).samples, out, atol=1e-9)
    shifted = Waveform(3.0 * source.samples + 2.0, 250.0)
    np.testing.assert_allclose(normalize(shifted).samples, out, atol=1e-9)
    assert np.all(normalize(Waveform(np.ones(10), 250.0)).samples == 0.0)


def test_morlet_sine_dominates_its_row() -> None:
    """The row tuned to the sine carries the most energy."""
    magnitudes = morlet_cwt(_sine(20.0), [10.0, 20.0, 40.0])[:, INTERIOR]
    energy = (magnitudes**2).sum(axis=1)
    assert np.argmax(energy) == 1


def test_morlet_zero_and_impulse() -> None:
    """Zero in, zero out; an impulse reproduces the kernel envelope."""
    zero = morlet_cwt(Waveform(np.zeros(501), 250.0), [20.0])
    np.testing.assert_allclose(zero, 0.0, atol=1e-12)
    impulse = np.zeros(501)
    impulse[250] = 1.0
    row = morlet_cwt(Waveform(impulse, 250.0), [20.0])[0]
    kernel = morlet_kernel(20.0, 250.0)
    half = kernel.size // 2
    np.testing.assert_allclose(row[250 - half : 251 + half], np.abs(kernel), atol=1e-12)
    assert np.sum(np.abs(kernel) ** 2) == pytest.approx(1.0)


def test_morlet_frequency_validation() -> None:
    """Frequencies must lie inside (0, fs/2)."""
    with pytest.raises(InputValidationError):
        morlet_cwt(_sine(5.0), [125.0])


def test_detect_peaks_on_pulse_train() -> None:
    """Beats every 0.5 s over 15 s are all found within 20 ms."""
    fs = 250.0
    t = np.arange(int(ECG_DURATION * fs)) / fs
    truth = np.arange(0.25, ECG_DURATION, 0.5)
    samples = sum(ricker(t - beat) for beat in truth)
    result = extract_events(Waveform(samples, fs), Modality.ECG)
    assert not result.flagged
    assert abs(result.event_times.size - truth.size) <= 1
    inner = truth[(truth > 1.0) & (truth < ECG_DURATION - 1.0)]
    found = result.event_times
    assert all(np.min(np.abs(found - beat)) <= 0.02 for beat in inner)


def test_detect_peaks_on_breathing() -> None:
    """A 2 s breathing cycle over 60 s gives 30 breaths at the crests."""
    w = _sine(0.5, fs=50.0, seconds=60.0)
    result = extract_events(w, Modality.RESPIRATION)
    assert abs(result.event_times.size - 30) <= 1
    crests = np.arange(0.5, 60.0, 2.0)
    assert _match(result.event_times, crests, 0.1)


def test_detect_peaks_flat_signal_is_flagged() -> None:
    """A constant has no events."""
    flat = Waveform(np.ones(3750), 250.0)
    for modality in Modality:
        result = detect_peaks(flat, modality)
        assert result.flagged
        assert result.event_times.size == 0


def test_scale_to_median_peak() -> None:
    """Peaks of height 2 are scaled to 1."""
    samples = np.zeros(100)
    samples[[10, 50, 90]] = 2.0
    scaled = scale_to_median_peak(Waveform(samples, 10.0), [1.0, 5.0, 9.0])
    np.testing.assert_allclose(scaled.samples[[10, 50, 90]], 1.0)
    with pytest.raises(InputValidationError):
        scale_to_median_peak(Waveform(samples, 10.0), [])


@pytest.mark.parametrize(
    ("interval", "expected"),
    [
        (0.5999, SeverityLabel.NORMAL),
        (0.6, SeverityLabel.MILD),
        (0.7, SeverityLabel.MILD),
        (0.75, SeverityLabel.MODERATE_SEVERE),
        (1.2, SeverityLabel.MODERATE_SEVERE),
    ],
)
def test_bradycardia_boundaries(interval: float, expected: SeverityLabel) -> None:
    """100 bpm is mild and 80 bpm is moderate/severe."""
    times = [0.0, 0.5, 1.0, 1.0 + interval, 1.5 + interval]
    assert label_bradycardia(times) is expected
    assert label_for(Modality.ECG, times) is expected


@pytest.mark.parametrize(
    ("gap", "expected"),
    [
        (3.999, SeverityLabel.NORMAL),
        (4.0, SeverityLabel.MILD),
        (6.0, SeverityLabel.MILD),
        (6.001, SeverityLabel.MODERATE_SEVERE),
    ],
)
def test_apnea_boundaries(gap: float, expected: SeverityLabel) -> None:
    """4 s and 6 s both count as mild."""
    times = [0.0, 2.0, 2.0 + gap, 4.0 + gap]
    assert label_apnea(times) is expected
    assert label_for(Modality.RESPIRATION, times) is expected


def test_labelers_need_two_events() -> None:
    """One event cannot be labeled."""
    assert label_bradycardia([1.0]) is None
    assert label_apnea([]) is None


def test_labelers_reject_repeated_times() -> None:
    """A zero interval has no rate."""
    with pytest.raises(InputValidationError):
        label_bradycardia([1.0, 1.0])
    with pytest.raises(InputValidationError):
        label_apnea([0.0, 3.0, 3.0, 5.0])
    with pytest.raises(InputValidationError):
        label_for(Modality.ECG, [0.0, float("nan")])


def test_amplitude_rows() -> None:
    """+3 is the top row, -3 the bottom and 0 the middle."""
    rows = amplitude_rows(np.array([3.0, 10.0, 0.0, -3.0, -10.0]), 32)
    assert rows.tolist() == [0, 0, 16, 31, 31]


@pytest.mark.parametrize("mode", list(RasterMode))
def test_rasterize_draws_connected_trace(mode: RasterMode) -> None:
    """Binary pixels with every column inked and touching its neighbor."""
    rng = np.random.default_rng(9)
    w = normalize(Waveform(rng.normal(size=3750), 250.0))
    image = rasterize(w, mode=mode, label=SeverityLabel.MILD)
    assert (image.height, image.width) == (32, 64)
    assert image.label is SeverityLabel.MILD
    assert set(np.unique(image.pixels)) <= {0.0, 1.0}
    inked = [set(np.flatnonzero(image.pixels[:, c])) for c in range(64)]
    assert all(inked)
    assert all(inked[c] & inked[c - 1] for c in range(1, 64))
    assert image.flatten().shape == (32 * 64,)


def test_rasterize_flat_trace_sits_mid_height() -> None:
    """Zero amplitude is drawn on row 16."""
    image = rasterize(Waveform(np.zeros(200), 50.0))
    assert np.all(image.pixels[16] == 1.0)
    assert image.pixels.sum() == 64


def test_rasterize_short_waveform_is_resampled() -> None:
    """Fewer samples than columns still fill every column."""
    image = rasterize(Waveform(np.linspace(-1.0, 1.0, 10), 10.0), width=64)
    assert np.all(image.pixels.sum(axis=0) >= 1)


def test_rendering_ignores_gain_and_offset() -> None:
    """Normalizing first makes the image blind to a·w + b with a > 0."""
    rng = np.random.default_rng(14)
    samples = rng.normal(size=3750)
    image = rasterize(normalize(Waveform(samples, 250.0)))
    scaled = rasterize(normalize(Waveform(2.5 * samples - 7.0, 250.0)))
    np.testing.assert_array_equal(scaled.pixels, image.pixels)


@pytest.mark.parametrize("modality", list(Modality))
def test_label_imported(modality: Modality) -> None:
    """An imported waveform is labeled by the same detector as a generated one."""
    segment = generate_segment(modality, SeverityLabel.MILD, 11)
    assert segment.source == "synthetic"
    imported = label_imported(segment.waveform, modality)
    assert imported is not None
    assert imported.source == "imported"
    assert imported.seed is None
    assert imported.label is SeverityLabel.MILD
    np.testing.assert_array_equal(imported.event_times, segment.event_times)

@pytest.mark.parametrize("label", list(SeverityLabel))
def test_generators_round_trip_and_repeat(label: SeverityLabel) -> None:
    """Generated segments carry the label detection gives them."""
    for seed in range(3):
        ecg = gen_ecg(label, seed)
        assert ecg.waveform.samples.size == 3750
        assert ecg.label is label
        assert label_bradycardia(ecg.event_times) is label
        again = gen_ecg(label, seed)
        assert np.array_equal(ecg.waveform.samples, again.waveform.samples)
        resp = gen_resp(label, seed)
        assert resp.waveform.samples.size == 3000
        assert label_apnea(resp.event_times) is label


def test_generate_segment_dispatches_on_modality() -> None:
    """The modality picks the generator and its default rate."""
    ecg = generate_segment(Modality.ECG, SeverityLabel.NORMAL, 4)
    resp = generate_segment(Modality.RESPIRATION, SeverityLabel.NORMAL, 4)
    assert ecg.waveform.fs == 250.0
    assert resp.waveform.fs == 50.0
    assert ecg.modality is Modality.ECG
    assert resp.modality is Modality.RESPIRATION


@pytest.mark.slow
@pytest.mark.parametrize("modality", list(Modality))
def test_generator_round_trip_many_seeds(modality: Modality) -> None:
    """One hundred seeds per class."""
    for label in SeverityLabel:
        for seed in range(100):
            segment = generate_segment(modality, label, seed)
            assert label_for(modality, segment.event_times) is label


@pytest.mark.slow
def test_ecg_detection_matches_generated_beats() -> None:
    """Precision and recall of 1 at 20 ms on generated ECG."""
    for seed in range(100):
        label = SeverityLabel(seed % 3)
        segment = gen_ecg(label, seed)
        beats = _beat_times(label, rng_for(seed, Stream.ATTEMPT, segment.attempt))
        window = (1.0, ECG_DURATION - 1.0)
        truth = beats[(beats > window[0]) & (beats < window[1])]
        found = segment.event_times
        found = found[(found > window[0]) & (found < window[1])]
        assert _match(found, truth, 0.02), seed


@pytest.mark.slow
def test_respiration_detection_on_noisy_breathing() -> None:
    """Precision and recall of 1 at 100 ms on noisy sine breathing."""
    fs = 50.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        period = rng.uniform(1.0, 3.0)
        t = np.arange(int(60 * fs)) / fs
        samples = np.sin(2 * np.pi * t / period) + rng.normal(0, 0.05, t.size)
        result = extract_events(Waveform(samples, fs), Modality.RESPIRATION)
        crests = np.arange(period / 4, 60.0, period)
        truth = crests[(crests > 1.0) & (crests < 59.0)]
        found = result.event_times[
            (result.event_times > 1.0) & (result.event_times < 59.0)
        ]
        assert _match(found, truth, 0.1), seed


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def test_import_csv_well_formed(tmp_path: Path) -> None:
    """Four rows give four samples at the inferred rate."""
    path = _write(tmp_path / "a.csv", "0,1\n0.004,2\n0.008,3\n0.012,4\n")
    (waveform,) = import_csv(path)
    assert waveform.samples.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert waveform.fs == pytest.approx(250.0)


def test_import_csv_header_and_columns(tmp_path: Path) -> None:
    """A header row is skipped and each value column becomes a waveform."""
    path = _write(tmp_path / "b.csv", "time,ecg,resp\n0,1,5\n0.5,2,6\n1.0,3,7\n")
    first, second = import_csv(path)
    assert first.samples.tolist() == [1.0, 2.0, 3.0]
    assert second.samples.tolist() == [5.0, 6.0, 7.0]
    assert first.fs == 2.0


@pytest.mark.parametrize(
    ("text", "line"),
    [
        ("0,1\n0.004,2\n0.012,3\n0.016,4\n", 3),
        ("t,v\n0,1\n0.004,2\n0.004,3\n", 4),
        ("0,1\n0.004,x\n0.008,3\n", 2),
    ],
)
def test_import_csv_errors_carry_line(tmp_path: Path, text: str, line: int) -> None:
    """Irregular steps, repeated times and bad cells name the line."""
    with pytest.raises(ParseError) as error:
        import_csv(_write(tmp_path / "c.csv", text))
    assert error.value.line == line


def test_import_csv_missing_file(tmp_path: Path) -> None:
    """An absent file is a parse error."""
    with pytest.raises(ParseError):
        import_csv(tmp_path / "missing.csv")
