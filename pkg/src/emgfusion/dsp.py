"""EMG preprocessing and feature extraction.

Windows are ``(channels, samples)`` arrays; every function here is pure and
returns new arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import InvalidSignal, NyquistViolation, WindowTooShort

N_CHANNELS = 8
DEFAULT_SAMPLE_RATE_HZ = 200.0
DEFAULT_WINDOW_SAMPLES = 52
MIN_WINDOW_SAMPLES = 4
NOTCH_HZ = 60.0
NOTCH_POLE_RADIUS = 0.95
FEATURES_PER_CHANNEL = 5
FEATURE_NAMES = ("ssi", "max", "min", "mean_frequency_hz", "mean_power")
N_FEATURES = N_CHANNELS * FEATURES_PER_CHANNEL


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EmgWindow:
    """One fixed-length capture: 8 channels x N samples."""

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != N_CHANNELS:
            raise InvalidSignal(f"expected {N_CHANNELS} x N samples, got shape {x.shape}")
        if x.shape[1] < MIN_WINDOW_SAMPLES:
            raise WindowTooShort(f"need at least {MIN_WINDOW_SAMPLES} samples, got {x.shape[1]}")
        if not np.all(np.isfinite(x)):
            raise InvalidSignal("window contains non-finite samples")
        if not (self.sample_rate_hz > 0 and np.isfinite(self.sample_rate_hz)):
            raise InvalidSignal(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", _frozen(x))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def replace(self, samples: np.ndarray) -> "EmgWindow":
        return EmgWindow(samples, self.sample_rate_hz)


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """One-sided periodogram; ``freqs_hz[k] = k * fs / N`` for k = 0..N//2."""

    freqs_hz: np.ndarray
    power: np.ndarray
    n_samples: int


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise InvalidSignal("signal contains non-finite samples")


def remove_dc_offset(w: EmgWindow) -> EmgWindow:
    x = w.samples
    _check_finite(x)
    return w.replace(x - x.mean(axis=1, keepdims=True))


def notch_coefficients(fs: float, f0: float = NOTCH_HZ, r: float = NOTCH_POLE_RADIUS):
    """Second-order notch with zeros at exp(+-j w0), poles at r exp(+-j w0).

    The numerator is scaled for unity gain at DC.
    """
    if fs <= 2 * f0:
        raise NyquistViolation(f"sample rate {fs} Hz does not resolve {f0} Hz")
    c = np.cos(2 * np.pi * f0 / fs)
    a = np.array([1.0, -2 * r * c, r * r])
    b = np.array([1.0, -2 * c, 1.0])
    b *= a.sum() / b.sum()
    return b, a


def notch_filter_60hz(w: EmgWindow) -> EmgWindow:
    b, a = notch_coefficients(w.sample_rate_hz)
    # zero initial state, causal
    return w.replace(sps.lfilter(b, a, w.samples, axis=1))


def power_spectrum(channel, sample_rate_hz: float) -> PowerSpectrum:
    x = np.asarray(channel, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidSignal("power_spectrum takes a single channel")
    n = x.size
    if n < MIN_WINDOW_SAMPLES:
        raise WindowTooShort(f"need at least {MIN_WINDOW_SAMPLES} samples, got {n}")
    _check_finite(x)
    spec = np.fft.rfft(x)
    power = (spec.real**2 + spec.imag**2) / n
    freqs = np.arange(n // 2 + 1) * (sample_rate_hz / n)
    return PowerSpectrum(_frozen(freqs), _frozen(power), n)


def ssi(x) -> float:
    """Simple square integral: sum of squared samples."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.dot(x, x))


def mean_frequency(ps: PowerSpectrum) -> float:
    total = ps.power.sum()
    if total == 0.0:
        return 0.0
    return float(np.dot(ps.freqs_hz, ps.power) / total)


def mean_power(ps: PowerSpectrum) -> float:
    return float(ps.power.sum() / ps.power.size)


def channel_features(x, sample_rate_hz: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    ps = power_spectrum(x, sample_rate_hz)
    return np.array([ssi(x), x.max(), x.min(), mean_frequency(ps), mean_power(ps)])


def extract_features(w: EmgWindow) -> np.ndarray:
    """40-value feature vector, channel-major, per channel in FEATURE_NAMES order."""
    return np.concatenate([channel_features(ch, w.sample_rate_hz) for ch in w.samples])


def preprocess(w: EmgWindow) -> EmgWindow:
    return notch_filter_60hz(remove_dc_offset(w))
