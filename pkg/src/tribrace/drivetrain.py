"""Behavioral models of the actuation chain.

Covers the linear leg actuators (velocity-controlled, force-limited), the
two-stage worm gearbox driving the side-leg revolute joints, the joint
encoders, and the travel-limit switches. All step functions are pure: they
take a JointState and return a new one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError
from .kinematics import JointState

SWITCH_NONE = "none"
SWITCH_LOWER = "lower_tripped"
SWITCH_UPPER = "upper_tripped"


@dataclass(frozen=True)
class LinearActuatorParams:
    """Leg extension actuator: 625 mm base, 500 mm stroke, 1 kN push limit."""

    base_length: float = 0.625
    stroke: float = 0.5
    max_push_force: float = 1000.0
    max_speed: float = 0.01

    def __post_init__(self):
        if self.base_length <= 0.0 or self.stroke <= 0.0:
            raise ValueError("base_length and stroke must be positive")
        if self.max_push_force <= 0.0 or self.max_speed <= 0.0:
            raise ValueError("max_push_force and max_speed must be positive")

    @property
    def max_extension(self) -> float:
        return self.base_length + self.stroke


@dataclass(frozen=True)
class GearboxParams:
    """Two-stage reduction: 1:2 spur into a 1:40 worm, 80:1 overall.

    The worm stage cannot be back-driven under load (self_locking), so a held
    joint ignores external torque entirely. Efficiency spans the plausible
    band [0.38, 0.882]; the conservative low end is the default.
    """

    stage1_ratio: float = 2.0
    stage2_ratio: float = 40.0
    efficiency_eta: float = 0.38
    motor_stall_torque: float = 1.765
    self_locking: bool = True

    def __post_init__(self):
        if self.stage1_ratio <= 0.0 or self.stage2_ratio <= 0.0:
            raise ValueError("gear ratios must be positive")
        if not 0.0 < self.efficiency_eta <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency_eta}")

    @property
    def overall_ratio(self) -> float:
        return self.stage1_ratio * self.stage2_ratio


@dataclass(frozen=True)
class EncoderModel:
    """Quantizing encoder; the prototype reports angles to 0.02 rad."""

    quantization_step: float = 0.02

    def __post_init__(self):
        if self.quantization_step <= 0.0:
            raise ValueError("quantization_step must be positive")


@dataclass(frozen=True)
class LimitSwitchSet:
    """Calibration switches at the ends of the rotary travel."""

    lower_trip_angle: float = -math.pi / 2
    upper_trip_angle: float = math.pi / 2

    def __post_init__(self):
        if not self.lower_trip_angle < self.upper_trip_angle:
            raise ValueError("lower_trip_angle must be below upper_trip_angle")


@dataclass(frozen=True)
class DrivetrainParams:
    """Bundle of all actuation models plus the rotary joint rate limit.

    The 0.785 rad/s default rate limit completes a 1.57 rad step in ~2 s,
    matching the measured step response of the prototype.
    """

    actuator: LinearActuatorParams = LinearActuatorParams()
    gearbox: GearboxParams = GearboxParams()
    encoder: EncoderModel = EncoderModel()
    switches: LimitSwitchSet = LimitSwitchSet()
    rotary_rate_limit: float = 0.785

    def __post_init__(self):
        if self.rotary_rate_limit <= 0.0:
            raise ValueError("rotary_rate_limit must be positive")


def gearbox_output_torque(t_in: float, ratio: float, eta: float) -> float:
    """Output torque of a reduction stage: t_in * ratio * eta."""
    if ratio <= 0.0:
        raise DomainError(f"gear ratio must be positive, got {ratio}")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"efficiency must be in (0, 1], got {eta}")
    return t_in * ratio * eta


def linear_actuator_step(
    state: JointState,
    cmd_velocity: float,
    axial_load: float,
    dt: float,
    params: LinearActuatorParams,
) -> JointState:
    """Advance a prismatic leg one step under velocity control.

    The commanded rate saturates at max_speed; pushing against a load at or
    above max_push_force stalls the actuator; the extension hard-stops at the
    ends of the stroke.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    v = max(-params.max_speed, min(params.max_speed, cmd_velocity))
    if v > 0.0 and axial_load >= params.max_push_force:
        v = 0.0
    new_ext = state.extension + v * dt
    new_ext = max(params.base_length, min(params.max_extension, new_ext))
    return replace(state, extension=new_ext, extension_rate=(new_ext - state.extension) / dt)


def rotary_joint_step(
    state: JointState,
    cmd_target: float,
    external_torque: float,
    dt: float,
    gearbox: GearboxParams,
    rate_limit: float,
) -> JointState:
    """Advance a revolute joint one step under position control.

    Tracking is rate-limited first-order with no overshoot. A held joint
    (target == current rotation) on a self-locking gearbox does not move for
    any external torque; a non-self-locking gearbox slips once the external
    torque beats the geared stall torque.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if cmd_target == state.rotation:
        if not gearbox.self_locking:
            holding = gearbox_output_torque(
                gearbox.motor_stall_torque, gearbox.overall_ratio, gearbox.efficiency_eta
            )
            if abs(external_torque) > holding:
                slip = math.copysign(rate_limit * dt, external_torque)
                return replace(state, rotation=state.rotation + slip, rotation_rate=slip / dt)
        return replace(state, rotation_rate=0.0)
    step = cmd_target - state.rotation
    max_step = rate_limit * dt
    step = max(-max_step, min(max_step, step))
    return replace(state, rotation=state.rotation + step, rotation_rate=step / dt)


def encoder_read(true_angle: float, model: EncoderModel) -> float:
    """Quantized encoder reading, round-half-up so 1.57 reads 1.58 at q=0.02."""
    q = model.quantization_step
    return math.floor(true_angle / q + 0.5) * q


def limit_switch_state(rotation: float, switches: LimitSwitchSet) -> str:
    """Switch state for a rotation; trips inclusively at either limit."""
    if rotation <= switches.lower_trip_angle:
        return SWITCH_LOWER
    if rotation >= switches.upper_trip_angle:
        return SWITCH_UPPER
    return SWITCH_NONE
