"""Monte-Carlo trials of the unimodal and fused error model, plus the block
statistics (error percent, sample variance) used to report them."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyInput, InsufficientData, InvalidProbability
from .fusion import CorrespondenceTable
from .labels import GestureLabel, SpeechCommand
from .rng import SplitMix64
from .synth import ErrorRateTable, sample_errors


def _counts(counts: Sequence[int], block_size: int | None = None) -> list[int]:
    out = [int(c) for c in counts]
    if not out:
        raise EmptyInput("no block counts given")
    if any(c < 0 for c in out):
        raise ValueError("error counts must be nonnegative")
    if block_size is not None:
        if block_size < 1:
            raise ValueError("block size must be >= 1")
        if any(c > block_size for c in out):
            raise ValueError(f"a block count exceeds the block size {block_size}")
    return out


def error_percent(counts: Sequence[int], block_size: int) -> float:
    c = _counts(counts, block_size)
    return 100.0 * sum(c) / (len(c) * block_size)


def sample_variance(counts: Sequence[float]) -> float:
    c = [float(v) for v in counts]
    if len(c) < 2:
        raise InsufficientData("sample variance needs at least two blocks")
    m = sum(c) / len(c)
    return sum((v - m) ** 2 for v in c) / (len(c) - 1)


def mean_error(errors: Sequence[float]) -> float:
    e = [float(v) for v in errors]
    if not e:
        raise EmptyInput("no error values given")
    return sum(e) / len(e)


def expected_fused_error(p_g: float, p_s: float) -> float:
    """Fused error when speech is consulted only after a gesture failure."""
    for p in (p_g, p_s):
        if not 0.0 <= p <= 1.0:
            raise InvalidProbability(f"probability {p} outside [0, 1]")
    return p_g * p_s


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


@dataclass(frozen=True)
class TrialReport:
    per_block_error_counts: tuple[int, ...]
    block_size: int
    config_echo: dict = field(default_factory=dict)

    @property
    def n_blocks(self) -> int:
        return len(self.per_block_error_counts)

    @property
    def n_trials(self) -> int:
        return self.n_blocks * self.block_size

    @property
    def error_percent(self) -> float:
        return error_percent(self.per_block_error_counts, self.block_size)

    @property
    def error_rate(self) -> float:
        return sum(self.per_block_error_counts) / self.n_trials

    @property
    def sample_variance(self) -> float | None:
        if self.n_blocks < 2:
            return None
        return sample_variance(self.per_block_error_counts)

    def to_dict(self) -> dict:
        var = self.sample_variance
        return {
            "per_block_error_counts": list(self.per_block_error_counts),
            "block_size": self.block_size,
            "n_blocks": self.n_blocks,
            "error_percent": self.error_percent,
            "sample_variance": var,
            "display": {
                "error_percent": round(self.error_percent, 4),
                "sample_variance": None if var is None else round(var, 4),
            },
            "config": self.config_echo,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _block_streams(seed: int, n_blocks: int):
    master = SplitMix64(seed)
    return [master.spawn() for _ in range(n_blocks)]


def run_unimodal_trial(target, rates: ErrorRateTable | None = None, n_blocks: int = 10,
                       block_size: int = 100, seed: int = 0) -> TrialReport:
    """Error counts for one gesture or one speech command at its tabled rate.

    ``target`` is a :class:`GestureLabel` or :class:`SpeechCommand`; the
    modality follows from its type.
    """
    rates = rates or ErrorRateTable()
    if isinstance(target, GestureLabel):
        modality, p = "gesture", rates.gesture_error[target]
    elif isinstance(target, SpeechCommand):
        modality, p = "speech", rates.speech_error[target]
    else:
        raise TypeError("target must be a GestureLabel or SpeechCommand")
    if n_blocks < 1 or block_size < 1:
        raise ValueError("n_blocks and block_size must be >= 1")
    counts = tuple(int(sample_errors(p, s, block_size).sum()) for s in _block_streams(seed, n_blocks))
    echo = {"modality": modality, "target": target.canonical, "p_error": p, "seed": seed}
    return TrialReport(counts, block_size, echo)


def run_fusion_trial(pair: tuple[SpeechCommand, GestureLabel], rates: ErrorRateTable | None = None,
                     n_blocks: int = 4, block_size: int = 50, seed: int = 0,
                     correspondence: CorrespondenceTable | None = None) -> TrialReport:
    """Gesture first, speech as fallback; a trial fails only if both fail.

    Each trial consumes two uniforms from its block stream, gesture then
    speech, whether or not the speech draw ends up mattering.
    """
    rates = rates or ErrorRateTable()
    command, gesture = SpeechCommand(pair[0]), GestureLabel(pair[1])
    corr = correspondence or CorrespondenceTable()
    if corr.gesture_to_speech[gesture] is not command:
        raise ValueError(f"{command.canonical!r} is not paired with {gesture.canonical}")
    if n_blocks < 1 or block_size < 1:
        raise ValueError("n_blocks and block_size must be >= 1")
    p_g, p_s = rates.gesture_error[gesture], rates.speech_error[command]
    counts = []
    for stream in _block_streams(seed, n_blocks):
        u = stream.uniforms(2 * block_size).reshape(block_size, 2)
        counts.append(int(np.count_nonzero((u[:, 0] < p_g) & (u[:, 1] < p_s))))
    echo = {"pair": [command.canonical, gesture.canonical], "p_gesture": p_g, "p_speech": p_s,
            "expected_percent": 100.0 * expected_fused_error(p_g, p_s), "seed": seed}
    return TrialReport(tuple(counts), block_size, echo)
