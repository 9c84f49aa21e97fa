"""Decision-level fusion of armband gestures and speech commands.

Gestures have priority. Speech only drives the arm when the gesture channel
failed, which at runtime means the recogniser's confidence fell below a
threshold.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arm import GESTURE_PINS, ArmAction, ArmConfig
from .errors import DimensionError, InvalidProbability, InvalidWeights
from .labels import GestureLabel, SpeechCommand

DEFAULT_THRESHOLD = 0.6


class Source(enum.Enum):
    GESTURE = "GESTURE"
    SPEECH = "SPEECH"


class Provenance(enum.Enum):
    GESTURE_PRIMARY = "GESTURE"
    SPEECH_FALLBACK = "SPEECH"
    NO_COMMAND = "NONE"


DEFAULT_CORRESPONDENCE = {
    GestureLabel.DOUBLE_TAP: SpeechCommand.MOVE_GRIPPER,
    GestureLabel.FIST: SpeechCommand.MOVE_DOWN,
    GestureLabel.FINGERS_SPREAD: SpeechCommand.MOVE_UP,
    GestureLabel.WAVE_IN: SpeechCommand.MOVE_LEFT,
    GestureLabel.WAVE_OUT: SpeechCommand.MOVE_RIGHT,
}


class CorrespondenceTable:
    """Bijection between gestures and the speech commands that mean the same move."""

    def __init__(self, pairs: dict | None = None):
        pairs = dict(DEFAULT_CORRESPONDENCE if pairs is None else pairs)
        g2s = {GestureLabel(g): SpeechCommand(s) for g, s in pairs.items()}
        if set(g2s) != set(GestureLabel) or set(g2s.values()) != set(SpeechCommand):
            raise ValueError("correspondence must pair all five gestures with all five commands")
        self.gesture_to_speech = g2s
        self.speech_to_gesture = {s: g for g, s in g2s.items()}

    @classmethod
    def from_json(cls, obj: dict) -> "CorrespondenceTable":
        """``{"Fist": "move down", ...}``."""
        return cls({GestureLabel.parse(g): SpeechCommand.parse(s) for g, s in obj.items()})

    def pairs(self):
        return [(s, g) for g, s in self.gesture_to_speech.items()]


@dataclass(frozen=True)
class ModalityEvent:
    source: Source
    timestamp_ms: int
    label: Optional[GestureLabel] = None
    confidence: float = 1.0
    command: Optional[SpeechCommand] = None

    def __post_init__(self):
        if self.timestamp_ms < 0:
            raise ValueError("timestamp must be nonnegative")
        if self.source is Source.GESTURE:
            if self.label is None or self.command is not None:
                raise ValueError("gesture events carry a label and no command")
            if not 0.0 <= self.confidence <= 1.0:
                raise InvalidProbability(f"confidence {self.confidence} outside [0, 1]")
        elif self.command is None or self.label is not None:
            raise ValueError("speech events carry a command and no label")

    @classmethod
    def gesture(cls, ts: int, label: GestureLabel, confidence: float) -> "ModalityEvent":
        return cls(Source.GESTURE, ts, label=GestureLabel(label), confidence=confidence)

    @classmethod
    def speech(cls, ts: int, command: SpeechCommand) -> "ModalityEvent":
        return cls(Source.SPEECH, ts, command=SpeechCommand(command))


@dataclass(frozen=True)
class FusedDecision:
    action: Optional[ArmAction]
    provenance: Provenance
    conflict_flag: bool = False
    timestamp_ms: int = 0


@dataclass(frozen=True)
class FusionEngine:
    correspondence: CorrespondenceTable = field(default_factory=CorrespondenceTable)
    arm_config: ArmConfig = field(default_factory=ArmConfig)
    threshold: float = DEFAULT_THRESHOLD

    def action_for(self, payload) -> ArmAction:
        """Arm action for a gesture label or speech command."""
        if isinstance(payload, GestureLabel):
            gesture = payload
        else:
            gesture = self.correspondence.speech_to_gesture[SpeechCommand(payload)]
        return self.arm_config.action_for_pin(GESTURE_PINS[gesture])

    def fuse(self, gesture: Optional[ModalityEvent], speech: Optional[ModalityEvent]) -> FusedDecision:
        g_action = s_action = None
        if gesture is not None and gesture.confidence >= self.threshold:
            g_action = self.action_for(gesture.label)
        if speech is not None:
            s_action = self.action_for(speech.command)
        if g_action is not None:
            conflict = s_action is not None and s_action != g_action
            return FusedDecision(g_action, Provenance.GESTURE_PRIMARY, conflict, gesture.timestamp_ms)
        if s_action is not None:
            return FusedDecision(s_action, Provenance.SPEECH_FALLBACK, False, speech.timestamp_ms)
        ts = gesture.timestamp_ms if gesture is not None else 0
        return FusedDecision(None, Provenance.NO_COMMAND, False, ts)


def fuse_priority(gesture: Optional[ModalityEvent], speech: Optional[ModalityEvent],
                  threshold: float = DEFAULT_THRESHOLD, engine: FusionEngine | None = None) -> FusedDecision:
    if not 0.0 <= threshold <= 1.0:
        raise InvalidProbability(f"threshold {threshold} outside [0, 1]")
    base = engine or FusionEngine()
    return FusionEngine(base.correspondence, base.arm_config, threshold).fuse(gesture, speech)


def action_for(payload, correspondence: CorrespondenceTable | None = None,
               arm_config: ArmConfig | None = None) -> ArmAction:
    engine = FusionEngine(correspondence or CorrespondenceTable(), arm_config or ArmConfig())
    return engine.action_for(payload)


def fuse_scores(score_vectors: Sequence, weights: Sequence | None = None) -> tuple[np.ndarray, int]:
    """Weighted sum rule over per-modality class-probability vectors.

    Returns the fused distribution and its argmax (ties go to the lowest
    index).
    """
    if len({len(v) for v in score_vectors}) > 1:
        raise DimensionError("score vectors differ in length")
    s = np.asarray(score_vectors, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] == 0:
        raise DimensionError("need one or more score vectors of equal length")
    w = np.ones(s.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (s.shape[0],):
        raise DimensionError(f"{s.shape[0]} score vectors but {w.size} weights")
    if np.any(s < 0) or not np.allclose(s.sum(axis=1), 1.0, atol=1e-6):
        raise InvalidProbability("each score vector must be a probability distribution")
    if np.any(w < 0) or not np.any(w > 0):
        raise InvalidWeights("weights must be nonnegative and not all zero")
    fused = w @ s / w.sum()
    fused /= fused.sum()
    return fused, int(np.argmax(fused))


def fuse_features(a, b) -> np.ndarray:
    """Feature-level fusion: ``a`` followed by ``b`` in one flat vector."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("features must be finite")
    return np.concatenate([a, b])


def one_hot_command(cmd: SpeechCommand) -> np.ndarray:
    v = np.zeros(len(SpeechCommand))
    v[SpeechCommand(cmd)] = 1.0
    return v
