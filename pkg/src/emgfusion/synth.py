"""Synthetic EMG captures, CSV persistence and modality error sampling.

The generator stands in for armband hardware. Each gesture gets its own
per-channel amplitude profile and base frequency, plus Gaussian noise and a
60 Hz mains component that preprocessing is expected to strip.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dsp
from .errors import InvalidProbability, ParseError, UnknownLabel
from .labels import GestureLabel, SpeechCommand
from .rng import SplitMix64

DEFAULT_PER_CLASS = 180


def default_amplitudes() -> np.ndarray:
    g = np.arange(len(GestureLabel))[:, None]
    c = np.arange(dsp.N_CHANNELS)[None, :]
    return 1.0 + 0.5 * ((g + c) % 5)


@dataclass(frozen=True)
class SynthConfig:
    amplitudes: np.ndarray = field(default_factory=default_amplitudes)
    # Fist, WaveIn, WaveOut, FingersSpread, DoubleTap; 60 Hz deliberately unused
    base_freqs_hz: tuple[float, ...] = (30.0, 40.0, 50.0, 35.0, 45.0)
    noise_coef: float = 0.2
    powerline_coef: float = 0.3
    n_samples: int = dsp.DEFAULT_WINDOW_SAMPLES
    sample_rate_hz: float = dsp.DEFAULT_SAMPLE_RATE_HZ


def generate_window(label: GestureLabel, seed: int, config: SynthConfig | None = None) -> dsp.EmgWindow:
    cfg = config or SynthConfig()
    label = GestureLabel(label)
    n, fs = cfg.n_samples, cfg.sample_rate_hz
    t = np.arange(n) / fs
    amp = np.asarray(cfg.amplitudes, dtype=np.float64)[label][:, None]
    phase = (np.arange(dsp.N_CHANNELS) * np.pi / 8)[:, None]
    noise = SplitMix64(seed).normals(dsp.N_CHANNELS * n).reshape(dsp.N_CHANNELS, n)
    x = (
        amp * np.sin(2 * np.pi * cfg.base_freqs_hz[label] * t + phase)
        + cfg.noise_coef * amp * noise
        + cfg.powerline_coef * np.sin(2 * np.pi * 60.0 * t)
    )
    return dsp.EmgWindow(x, fs)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray  # (rows, 40)
    labels: np.ndarray  # (rows,) canonical integer codes
    provenance_seed: int = 0

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[0] == 0:
            raise ValueError("dataset must have at least one row")
        if y.shape != (x.shape[0],):
            raise ValueError("one label per row required")
        if y.min() < 0 or y.max() >= len(GestureLabel):
            raise UnknownLabel(f"label codes must lie in 0..{len(GestureLabel) - 1}")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.size

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.features[idx], self.labels[idx], self.provenance_seed)


def generate_dataset(n_per_class: int = DEFAULT_PER_CLASS, seed: int = 0,
                     config: SynthConfig | None = None) -> LabeledDataset:
    """Preprocessed, featurised dataset with ``5 * n_per_class`` rows.

    Rows are interleaved by label (0, 1, 2, 3, 4, 0, 1, ...); window seeds come
    from one SplitMix64 stream seeded with ``seed``.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    stream = SplitMix64(seed)
    rows, labels = [], []
    for _ in range(n_per_class):
        for label in GestureLabel:
            w = generate_window(label, stream.next_u64(), config)
            rows.append(dsp.extract_features(dsp.preprocess(w)))
            labels.append(int(label))
    return LabeledDataset(np.vstack(rows), np.array(labels), seed)


def write_csv(d: LabeledDataset, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"f{i}" for i in range(d.features.shape[1])] + ["label"])
    for row, label in zip(d.features, d.labels):
        w.writerow([f"{v:.12g}" for v in row] + [GestureLabel(label).canonical])


def save_csv(d: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(d, fh)


def load_csv(path, n_features: int = dsp.N_FEATURES) -> LabeledDataset:
    expected_header = [f"f{i}" for i in range(n_features)] + ["label"]
    rows, labels = [], []
    with open(Path(path), encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, rec in enumerate(reader, start=1):
            if lineno == 1:
                if rec != expected_header:
                    raise ParseError("header must be f0..f{},label".format(n_features - 1), lineno)
                continue
            if not rec:
                continue
            if len(rec) != n_features + 1:
                raise ParseError(f"expected {n_features + 1} columns, got {len(rec)}", lineno)
            try:
                values = [float(v) for v in rec[:-1]]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if not all(np.isfinite(values)):
                raise ParseError("non-finite feature value", lineno)
            try:
                label = GestureLabel.parse(rec[-1])
            except UnknownLabel:
                raise UnknownLabel(f"line {lineno}: unknown label {rec[-1]!r}") from None
            rows.append(values)
            labels.append(int(label))
    if not rows:
        raise ParseError("no data rows", 1)
    return LabeledDataset(np.array(rows), np.array(labels))


# --- modality error model -------------------------------------------------

class Outcome(enum.Enum):
    CORRECT = "correct"
    ERROR = "error"


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"probability must lie in [0, 1], got {p}")
    return p


def sample_modality_outcome(p_error: float, stream: SplitMix64) -> Outcome:
    p = _check_probability(p_error)
    return Outcome.ERROR if stream.uniform() < p else Outcome.CORRECT


def sample_errors(p_error: float, stream: SplitMix64, n: int) -> np.ndarray:
    """Vectorised form of :func:`sample_modality_outcome`; True marks an error."""
    p = _check_probability(p_error)
    return stream.uniforms(n) < p


# Observed wrong/missed rates from the armband and speech API trials.
GESTURE_ERROR_RATES = {
    GestureLabel.WAVE_OUT: 0.095,
    GestureLabel.WAVE_IN: 0.091,
    GestureLabel.FIST: 0.136,
    GestureLabel.DOUBLE_TAP: 0.206,
    GestureLabel.FINGERS_SPREAD: 0.145,
}
SPEECH_ERROR_RATES = {
    SpeechCommand.MOVE_RIGHT: 0.100,
    SpeechCommand.MOVE_LEFT: 0.342,
    SpeechCommand.MOVE_UP: 0.089,
    SpeechCommand.MOVE_DOWN: 0.225,
    SpeechCommand.MOVE_GRIPPER: 0.141,
}


@dataclass(frozen=True)
class ErrorRateTable:
    gesture_error: dict = field(default_factory=lambda: dict(GESTURE_ERROR_RATES))
    speech_error: dict = field(default_factory=lambda: dict(SPEECH_ERROR_RATES))

    def __post_init__(self):
        g = {GestureLabel(k) if isinstance(k, int) else GestureLabel.parse(k): _check_probability(v)
             for k, v in self.gesture_error.items()}
        s = {SpeechCommand(k) if isinstance(k, int) else SpeechCommand.parse(k): _check_probability(v)
             for k, v in self.speech_error.items()}
        if set(g) != set(GestureLabel) or set(s) != set(SpeechCommand):
            raise ValueError("error-rate table needs all five gestures and all five commands")
        object.__setattr__(self, "gesture_error", g)
        object.__setattr__(self, "speech_error", s)

    @classmethod
    def from_json(cls, obj: dict) -> "ErrorRateTable":
        """``{"gesture": {"Fist": 0.136, ...}, "speech": {"move down": 0.225, ...}}``.

        Missing entries fall back to the defaults.
        """
        g = {k.canonical: v for k, v in GESTURE_ERROR_RATES.items()}
        s = {k.canonical: v for k, v in SPEECH_ERROR_RATES.items()}
        g.update(obj.get("gesture", {}))
        s.update(obj.get("speech", {}))
        # later keys win, so "FIST" from the file overrides the default "Fist"
        g2 = {}
        for k, v in g.items():
            g2[GestureLabel.parse(k)] = v
        s2 = {}
        for k, v in s.items():
            s2[SpeechCommand.parse(k)] = v
        return cls(g2, s2)
