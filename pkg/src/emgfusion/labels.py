"""Closed vocabularies shared by every module: gestures and speech commands."""
from __future__ import annotations

import enum

from .errors import UnknownLabel


class GestureLabel(enum.IntEnum):
    FIST = 0
    WAVE_IN = 1
    WAVE_OUT = 2
    FINGERS_SPREAD = 3
    DOUBLE_TAP = 4

    @property
    def canonical(self) -> str:
        """Name used in CSV files, e.g. ``"FingersSpread"``."""
        return _GESTURE_CANONICAL[self]

    @classmethod
    def parse(cls, name: str) -> "GestureLabel":
        """Accept the canonical name or the wire name, case-insensitively.

        ``"Fist"``, ``"FIST"``, ``"WaveIn"`` and ``"WAVE_IN"`` all work.
        """
        key = name.strip().replace("_", "").replace("-", "").lower()
        try:
            return _GESTURE_LOOKUP[key]
        except KeyError:
            raise UnknownLabel(f"unknown gesture label {name!r}") from None


_GESTURE_CANONICAL = {
    GestureLabel.FIST: "Fist",
    GestureLabel.WAVE_IN: "WaveIn",
    GestureLabel.WAVE_OUT: "WaveOut",
    GestureLabel.FINGERS_SPREAD: "FingersSpread",
    GestureLabel.DOUBLE_TAP: "DoubleTap",
}
_GESTURE_LOOKUP = {v.lower(): k for k, v in _GESTURE_CANONICAL.items()}


class SpeechCommand(enum.IntEnum):
    MOVE_RIGHT = 0
    MOVE_LEFT = 1
    MOVE_UP = 2
    MOVE_DOWN = 3
    MOVE_GRIPPER = 4

    @property
    def canonical(self) -> str:
        return self.name.lower().replace("_", " ")

    @classmethod
    def parse(cls, text: str) -> "SpeechCommand":
        key = " ".join(text.replace("_", " ").lower().split())
        for cmd in cls:
            if cmd.canonical == key:
                return cmd
        raise UnknownLabel(f"unknown speech command {text!r}")


N_CLASSES = len(GestureLabel)
