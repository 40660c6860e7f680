"""Force-threshold finite-state machine driving the bracing/drilling mission.

Four phases run in strict order: opening (side legs swing to their deployment
angles), initial bracing (legs extend until each tip feels first contact and
latches), hard bracing (slow push until every leg holds a higher force for a
sustained window), and drilling (feed the bit, spin on contact, halt on
overload). The transition function is pure: identical snapshots always yield
identical commands.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .drivetrain import SWITCH_LOWER, SWITCH_UPPER
from .kinematics import JointState

OPENING = "opening"
INITIAL_BRACING = "initial_bracing"
HARD_BRACING = "hard_bracing"
DRILLING = "drilling"
HALTED = "halted"

HALT_SAFETY = "safety_overload"
HALT_LIMIT_SWITCH = "limit_switch"
HALT_EXTERNAL = "external_stop"
HALT_COMPLETE = "complete"

PHASE_ORDER = (OPENING, INITIAL_BRACING, HARD_BRACING, DRILLING)


@dataclass(frozen=True)
class ControllerConfig:
    """Thresholds, speeds and durations for the four-phase policy.

    The contact/brace/safety thresholds default to values sitting just below
    or above the force levels observed in the reference mission (tens of
    newtons at first contact, hundreds when braced, ~1 kN while drilling).
    """

    open_targets: tuple[float, float] = (1.0471975511965976, -1.0471975511965976)
    brace_speed: float = 0.01
    hard_brace_speed: float = 0.002
    f_contact: float = 8.0
    f_brace: float = 120.0
    sustain_duration: float = 1.0
    f_safety: float = 1200.0
    drill_align_target: float = 0.0
    drill_feed_speed: float = 0.005
    control_period: float = 0.01
    open_angle_tolerance: float = 0.03
    max_extension: float = 1.125
    drill_target_depth: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.f_contact < self.f_brace < self.f_safety:
            raise ValueError("require 0 < f_contact < f_brace < f_safety")
        if not 0.0 < self.hard_brace_speed < self.brace_speed:
            raise ValueError("require 0 < hard_brace_speed < brace_speed")
        if self.sustain_duration <= 0.0 or self.control_period <= 0.0:
            raise ValueError("sustain_duration and control_period must be positive")
        if self.open_angle_tolerance <= 0.0:
            raise ValueError("open_angle_tolerance must be positive")


@dataclass(frozen=True)
class SensorSnapshot:
    """What the controller sees each period: tip forces, drill force, measured
    joints (rotations already encoder-quantized) and the limit switches."""

    time: float
    leg_forces: tuple[float, float, float]
    drill_force: float
    joint_states: tuple[JointState, JointState, JointState]
    limit_switches: tuple[str, str, str]


@dataclass(frozen=True)
class CommandSet:
    """Actuator commands for one control period."""

    rotation_targets: tuple[float, float]  # (left, right)
    extension_velocities: tuple[float, float, float]
    drill_rotation_on: bool = False
    drill_feed_velocity: float = 0.0
    drill_align_target: float = 0.0


@dataclass(frozen=True)
class ControllerState:
    """FSM phase plus the latches and timers that drive transitions."""

    phase: str = OPENING
    halt_reason: str | None = None
    contact_latches: tuple[bool, bool, bool] = (False, False, False)
    sustain_timers: tuple[float, float, float] = (0.0, 0.0, 0.0)
    phase_entry_time: float = 0.0
    drill_contact_seen: bool = False

    @property
    def phase_token(self) -> str:
        """Lowercase log token; halts carry their reason."""
        if self.phase == HALTED:
            return f"{HALTED}_{self.halt_reason}"
        return self.phase


def phase_is_at_least(phase: str, other: str) -> bool:
    return PHASE_ORDER.index(phase) >= PHASE_ORDER.index(other)


def opening_done(sensors: SensorSnapshot, config: ControllerConfig) -> bool:
    """Both measured side rotations within tolerance of the open targets.

    The tolerance must exceed the encoder quantization step or the phase can
    never complete.
    """
    left, right = sensors.joint_states[0], sensors.joint_states[2]
    return (
        abs(left.rotation - config.open_targets[0]) <= config.open_angle_tolerance
        and abs(right.rotation - config.open_targets[1]) <= config.open_angle_tolerance
    )


def initial_bracing_done(state: ControllerState) -> bool:
    """All three contact latches set."""
    return all(state.contact_latches)


def hard_bracing_done(state: ControllerState, sensors: SensorSnapshot, config: ControllerConfig) -> bool:
    """Every leg has held f_brace (inclusive) for the full sustain window."""
    return all(t >= config.sustain_duration for t in state.sustain_timers)


def _hold_targets(state_targets: tuple[float, float], sensors: SensorSnapshot) -> tuple[float, float]:
    """Clamp rotation targets so a tripped limit switch only allows motion
    back toward the interior."""
    measured = (sensors.joint_states[0].rotation, sensors.joint_states[2].rotation)
    switches = (sensors.limit_switches[0], sensors.limit_switches[2])
    out = []
    for target, angle, sw in zip(state_targets, measured, switches):
        if sw == SWITCH_UPPER:
            target = min(target, angle)
        elif sw == SWITCH_LOWER:
            target = max(target, angle)
        out.append(target)
    return (out[0], out[1])


def all_stop(config: ControllerConfig, sensors: SensorSnapshot) -> CommandSet:
    targets = _hold_targets(config.open_targets, sensors)
    return CommandSet(
        rotation_targets=targets,
        extension_velocities=(0.0, 0.0, 0.0),
        drill_rotation_on=False,
        drill_feed_velocity=0.0,
        drill_align_target=config.drill_align_target,
    )


def halt_state(state: ControllerState, reason: str, t: float) -> ControllerState:
    return replace(state, phase=HALTED, halt_reason=reason, phase_entry_time=t)


def drilling_step(state: ControllerState, sensors: SensorSnapshot, config: ControllerConfig) -> CommandSet:
    """Commands while drilling: hold the brace, feed the bit, spin it once the
    bit has registered contact. Overload handling lives in fsm_step."""
    return CommandSet(
        rotation_targets=_hold_targets(config.open_targets, sensors),
        extension_velocities=(0.0, 0.0, 0.0),
        drill_rotation_on=state.drill_contact_seen,
        drill_feed_velocity=config.drill_feed_speed,
        drill_align_target=config.drill_align_target,
    )


def fsm_step(
    state: ControllerState, sensors: SensorSnapshot, config: ControllerConfig
) -> tuple[ControllerState, CommandSet]:
    """One control period: update evidence, transition if due, emit commands."""
    t = sensors.time

    if state.phase == HALTED:
        return state, all_stop(config, sensors)

    if state.phase == OPENING:
        if opening_done(sensors, config):
            state = replace(state, phase=INITIAL_BRACING, phase_entry_time=t)
        else:
            return state, CommandSet(
                rotation_targets=_hold_targets(config.open_targets, sensors),
                extension_velocities=(0.0, 0.0, 0.0),
                drill_align_target=config.drill_align_target,
            )

    if state.phase == INITIAL_BRACING:
        latches = tuple(
            latched or force >= config.f_contact
            for latched, force in zip(state.contact_latches, sensors.leg_forces)
        )
        state = replace(state, contact_latches=latches)
        # A leg that runs out of stroke without touching anything means the
        # deployment geometry is wrong; stop rather than grind at the end stop.
        for latched, joint in zip(latches, sensors.joint_states):
            if not latched and joint.extension >= config.max_extension - 1e-9:
                return halt_state(state, HALT_EXTERNAL, t), all_stop(config, sensors)
        if initial_bracing_done(state):
            state = replace(state, phase=HARD_BRACING, phase_entry_time=t)
        else:
            velocities = tuple(0.0 if latched else config.brace_speed for latched in latches)
            return state, CommandSet(
                rotation_targets=_hold_targets(config.open_targets, sensors),
                extension_velocities=velocities,
                drill_align_target=config.drill_align_target,
            )

    if state.phase == HARD_BRACING:
        timers = tuple(
            timer + config.control_period if force >= config.f_brace else 0.0
            for timer, force in zip(state.sustain_timers, sensors.leg_forces)
        )
        state = replace(state, sustain_timers=timers)
        if hard_bracing_done(state, sensors, config):
            state = replace(state, phase=DRILLING, phase_entry_time=t)
        else:
            velocities = tuple(
                0.0 if force >= config.f_brace else config.hard_brace_speed
                for force in sensors.leg_forces
            )
            return state, CommandSet(
                rotation_targets=_hold_targets(config.open_targets, sensors),
                extension_velocities=velocities,
                drill_align_target=config.drill_align_target,
            )

    # DRILLING
    if any(force > config.f_safety for force in sensors.leg_forces):
        return halt_state(state, HALT_SAFETY, t), all_stop(config, sensors)
    if not state.drill_contact_seen and sensors.drill_force > 0.0:
        state = replace(state, drill_contact_seen=True)
    return state, drilling_step(state, sensors, config)
