"""Simulated five-servo Arduino arm driven by pin pulses."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .errors import UnknownPin
from .labels import GestureLabel

N_SERVOS = 5
GRIPPER = 4
HOME_ANGLE = 90.0
ANGLE_MIN, ANGLE_MAX = 0.0, 180.0
GRIPPER_CLOSED, GRIPPER_OPEN = 10.0, 170.0
STEP_DEGREES = 10.0

# Which Arduino pin each armband gesture drives.
GESTURE_PINS = {
    GestureLabel.FIST: 3,
    GestureLabel.WAVE_IN: 4,
    GestureLabel.WAVE_OUT: 5,
    GestureLabel.FINGERS_SPREAD: 9,
    GestureLabel.DOUBLE_TAP: 10,
}
PINS = tuple(sorted(GESTURE_PINS.values()))


@dataclass(frozen=True)
class ArmAction:
    pin: int
    servo_index: int
    delta_degrees: float = 0.0  # ignored for the gripper, which toggles

    def __post_init__(self):
        if self.pin not in PINS:
            raise UnknownPin(f"pin {self.pin} is not wired (expected one of {PINS})")
        if not 0 <= self.servo_index < N_SERVOS:
            raise ValueError(f"servo index {self.servo_index} out of range")

    @property
    def is_toggle(self) -> bool:
        return self.servo_index == GRIPPER


def default_pin_motions(step: float = STEP_DEGREES) -> dict[int, tuple[int, float]]:
    """pin -> (servo, delta). Base turns on 4/5, shoulder on 3/9, gripper on 10."""
    return {4: (0, -step), 5: (0, step), 3: (1, -step), 9: (1, step), 10: (GRIPPER, 0.0)}


@dataclass(frozen=True)
class ArmConfig:
    pin_motions: dict = field(default_factory=default_pin_motions)

    def __post_init__(self):
        motions = {int(k): (int(v[0]), float(v[1])) for k, v in self.pin_motions.items()}
        if set(motions) != set(PINS):
            raise UnknownPin(f"arm config must cover exactly pins {PINS}")
        object.__setattr__(self, "pin_motions", motions)

    @classmethod
    def from_json(cls, obj: dict) -> "ArmConfig":
        """``{"step_degrees": 10, "pins": {"3": [1, -10], ...}}``; both keys optional."""
        motions = default_pin_motions(float(obj.get("step_degrees", STEP_DEGREES)))
        motions.update({int(k): tuple(v) for k, v in obj.get("pins", {}).items()})
        return cls(motions)

    def action_for_pin(self, pin: int) -> ArmAction:
        if pin not in self.pin_motions:
            raise UnknownPin(f"pin {pin} is not wired")
        servo, delta = self.pin_motions[pin]
        return ArmAction(pin, servo, delta)


def _clamp(v: float) -> float:
    return min(max(v, ANGLE_MIN), ANGLE_MAX)


@dataclass
class ArmState:
    servo_angles: list = field(default_factory=lambda: [HOME_ANGLE] * N_SERVOS)
    pin_levels: dict = field(default_factory=lambda: {p: 0 for p in PINS})
    history: list = field(default_factory=list)  # (timestamp_ms, ArmAction)

    def apply(self, action: ArmAction, timestamp_ms: int = 0) -> "ArmState":
        """Pulse the action's pin and move its servo, in place."""
        if action.pin not in self.pin_levels:
            raise UnknownPin(f"pin {action.pin} is not wired")
        # pulse is instantaneous: high for this step only
        self.pin_levels[action.pin] = 1
        i = action.servo_index
        if action.is_toggle:
            self.servo_angles[i] = GRIPPER_CLOSED if self.servo_angles[i] >= HOME_ANGLE else GRIPPER_OPEN
        else:
            self.servo_angles[i] = _clamp(self.servo_angles[i] + action.delta_degrees)
        self.history.append((timestamp_ms, action))
        self.pin_levels[action.pin] = 0
        return self

    def dump(self) -> str:
        return "STATE " + " ".join(f"{a:.1f}" for a in self.servo_angles)


def new_arm() -> ArmState:
    return ArmState()


def apply(s: ArmState, a: ArmAction, timestamp_ms: int = 0) -> ArmState:
    """Non-mutating variant of :meth:`ArmState.apply`."""
    return copy.deepcopy(s).apply(a, timestamp_ms)
