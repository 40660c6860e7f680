"""Deterministic fixed-timestep mission engine.

Couples the controller FSM, the drivetrain models, the penalty-contact tunnel
and the planar body dynamics. One scenario is one single-threaded loop:
sense -> control (each control period) -> actuate -> contact forces ->
integrate -> log. Identical inputs produce bit-identical logs; there is no
wall-clock or unordered iteration anywhere in the path.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from . import controller as ctl
from .controller import CommandSet, ControllerConfig, ControllerState, SensorSnapshot
from .drivetrain import (
    SWITCH_NONE,
    DrivetrainParams,
    encoder_read,
    limit_switch_state,
    linear_actuator_step,
    rotary_joint_step,
)
from .environment import (
    ContactState,
    EnvironmentParams,
    contact_force,
    drill_reaction,
    signed_penetration,
)
from .errors import ConfigError, NumericalError
from .kinematics import JointState, RobotParams, rotate

HOLD_ALL_CONTACT = "fixed_until_all_contact"
HOLD_RELEASE_TIME = "fixed_until_release_time"
HOLD_NEVER = "never_held"

KIND_MISSION = "bracing_and_drilling"
KIND_TENSION = "tension_test"
KIND_STEP = "step_response"
KIND_WORKSPACE = "workspace_only"

LOG_COLUMNS = (
    "t_s", "phase",
    "f_left_n", "f_center_n", "f_right_n", "f_drill_n",
    "l_left_m", "l_center_m", "l_right_m",
    "theta_left_rad", "theta_right_rad",
    "drill_depth_m",
    "body_x_m", "body_y_m", "body_phi_rad",
    "ratio_left", "ratio_center", "ratio_right",
)


@dataclass(frozen=True)
class SimConfig:
    """Engine parameters; dt must not exceed the controller period."""

    dt: float = 0.001
    duration: float = 40.0
    gravity: float = 9.81
    hold_mode: str = HOLD_ALL_CONTACT
    hold_release_time: float = 0.0
    seed: int = 0
    initial_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scenario_kind: str = KIND_MISSION
    log_decimation: int = 10
    initial_extensions: tuple[float, float, float] = (0.625, 0.625, 0.625)
    sensor_noise_std: float = 0.0
    settle_window: float = 5.0
    drift_threshold: float = 0.001

    def __post_init__(self):
        if self.dt <= 0.0 or self.duration <= 0.0:
            raise ConfigError("dt and duration must be positive")
        if self.hold_mode not in (HOLD_ALL_CONTACT, HOLD_RELEASE_TIME, HOLD_NEVER):
            raise ConfigError(f"unknown hold_mode {self.hold_mode!r}")
        if self.scenario_kind not in (KIND_MISSION, KIND_TENSION, KIND_STEP, KIND_WORKSPACE):
            raise ConfigError(f"unknown scenario_kind {self.scenario_kind!r}")
        if self.log_decimation < 1:
            raise ConfigError("log_decimation must be >= 1")
        if self.sensor_noise_std < 0.0:
            raise ConfigError("sensor_noise_std must be nonnegative")


@dataclass(frozen=True)
class SimLogRecord:
    t: float
    phase: str
    f_left: float
    f_center: float
    f_right: float
    f_drill: float
    l_left: float
    l_center: float
    l_right: float
    theta_left: float
    theta_right: float
    drill_depth: float
    body_x: float
    body_y: float
    body_phi: float
    ratio_left: float
    ratio_center: float
    ratio_right: float

    def row(self) -> tuple:
        return (
            self.t, self.phase,
            self.f_left, self.f_center, self.f_right, self.f_drill,
            self.l_left, self.l_center, self.l_right,
            self.theta_left, self.theta_right,
            self.drill_depth,
            self.body_x, self.body_y, self.body_phi,
            self.ratio_left, self.ratio_center, self.ratio_right,
        )


@dataclass(frozen=True)
class BodyState:
    x: float = 0.0
    y: float = 0.0
    phi: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0


@dataclass
class SimResult:
    records: list[SimLogRecord]
    outcome: str
    summary: dict
    contact_trace: list = field(default_factory=list)


@dataclass(frozen=True)
class TensionResult:
    supported: bool
    max_drift: float | None
    release_time: float | None
    release_contacts: list[ContactState]
    result: SimResult


@dataclass(frozen=True)
class StepResponseResult:
    records: list[tuple[float, float, float, float]]  # (t, commanded, true, encoder)
    rise_time: float | None
    max_encoder_error: float


def force_ratios(f_left: float, f_center: float, f_right: float) -> tuple[float, float, float]:
    """Per-leg share of the total tip force; all zeros when nothing touches."""
    total = f_left + f_center + f_right
    if total <= 0.0:
        return (0.0, 0.0, 0.0)
    return (f_left / total, f_center / total, f_right / total)


def integrate_step(
    body: BodyState,
    wrench: tuple[float, float, float],
    dt: float,
    mass: float,
    inertia: float,
    pinned: bool = False,
) -> BodyState:
    """Semi-implicit Euler on the planar rigid body; a pinned body stays put."""
    if pinned:
        return replace(body, vx=0.0, vy=0.0, omega=0.0)
    fx, fy, mz = wrench
    vx = body.vx + (fx / mass) * dt
    vy = body.vy + (fy / mass) * dt
    omega = body.omega + (mz / inertia) * dt
    new = BodyState(
        x=body.x + vx * dt,
        y=body.y + vy * dt,
        phi=body.phi + omega * dt,
        vx=vx, vy=vy, omega=omega,
    )
    if not all(math.isfinite(v) for v in (new.x, new.y, new.phi, vx, vy, omega)):
        raise NumericalError(f"body state diverged: {new}")
    return new


def make_snapshot(
    time: float,
    leg_forces: tuple[float, float, float],
    drill_force: float,
    joints: tuple[JointState, JointState, JointState],
    drivetrain: DrivetrainParams,
    noise: random.Random | None = None,
    noise_std: float = 0.0,
) -> SensorSnapshot:
    """Assemble what the controller sees: forces as measured, rotations through
    the encoder, switch states from the true angles."""
    forces = leg_forces
    dforce = drill_force
    if noise is not None and noise_std > 0.0:
        forces = tuple(max(0.0, f + noise.gauss(0.0, noise_std)) for f in forces)
        dforce = max(0.0, dforce + noise.gauss(0.0, noise_std))
    measured = tuple(
        replace(j, rotation=encoder_read(j.rotation, drivetrain.encoder)) if i != 1 else j
        for i, j in enumerate(joints)
    )
    switches = (
        limit_switch_state(joints[0].rotation, drivetrain.switches),
        SWITCH_NONE,  # central leg carries no rotary stage
        limit_switch_state(joints[2].rotation, drivetrain.switches),
    )
    return SensorSnapshot(
        time=time,
        leg_forces=forces,
        drill_force=dforce,
        joint_states=measured,
        limit_switches=switches,
    )


class _ContactTracker:
    """Per-tip contact memory: previous depth/tip for rate estimates plus the
    tangential stick anchor for the clamped friction spring."""

    __slots__ = ("prev_depth", "prev_tip", "anchor")

    def __init__(self):
        self.prev_depth = 0.0
        self.prev_tip = None
        self.anchor = None


def _tip_contact(
    tip: tuple[float, float],
    tracker: _ContactTracker,
    env: EnvironmentParams,
    dt: float,
) -> tuple[float, float, tuple[float, float], float]:
    """Normal/tangential force for one tip; returns (N, T, normal, depth).

    The normal channel is the spec penalty law. The tangential channel is a
    stick anchor: a spring from the first-touch point, clamped to the Coulomb
    cone, whose anchor slides whenever the clamp engages. Unlike a purely
    velocity-regularized law this holds a braced body without steady creep.
    """
    depth, normal = signed_penetration(tip, env.tunnel)
    prev_tip = tracker.prev_tip if tracker.prev_tip is not None else tip
    depth_rate = (depth - tracker.prev_depth) / dt
    tracker.prev_depth = depth
    tracker.prev_tip = tip

    if depth <= 0.0:
        tracker.anchor = None
        return (0.0, 0.0, normal, depth)

    n_force = contact_force(depth, depth_rate, env.contact)
    if n_force <= 0.0:
        tracker.anchor = None
        return (0.0, 0.0, normal, depth)

    tau = (-normal[1], normal[0])
    if tracker.anchor is None:
        tracker.anchor = tip
    v_t = ((tip[0] - prev_tip[0]) * tau[0] + (tip[1] - prev_tip[1]) * tau[1]) / dt
    disp = (tip[0] - tracker.anchor[0]) * tau[0] + (tip[1] - tracker.anchor[1]) * tau[1]
    t_raw = -env.contact.stiffness * disp - env.contact.tangential_damping * v_t
    t_max = env.contact.friction_mu * n_force
    t_force = max(-t_max, min(t_max, t_raw))
    if t_force != t_raw:
        # Slip: move the anchor so the spring alone would produce the clamp.
        slide = disp - (-t_force / env.contact.stiffness)
        tracker.anchor = (tracker.anchor[0] + slide * tau[0], tracker.anchor[1] + slide * tau[1])
    return (n_force, t_force, normal, depth)


def _leg_geometry(body: BodyState, joints, robot: RobotParams):
    """World mounts, unit directions and tips for the three legs."""
    mounts, dirs, tips = [], [], []
    for offset, joint in zip(robot.leg_mount_offsets, joints):
        mx, my = rotate(offset, body.phi)
        mount = (body.x + mx, body.y + my)
        heading = body.phi + joint.rotation
        u = (math.cos(heading), math.sin(heading))
        mounts.append(mount)
        dirs.append(u)
        tips.append((mount[0] + joint.extension * u[0], mount[1] + joint.extension * u[1]))
    return mounts, dirs, tips


def _validate_mission_configs(sim: SimConfig, controller: ControllerConfig):
    if sim.dt > controller.control_period + 1e-12:
        raise ConfigError("sim.dt must not exceed the controller period")
    ratio = controller.control_period / sim.dt
    if abs(ratio - round(ratio)) > 1e-9:
        raise ConfigError("control_period must be an integer multiple of dt")


def run_scenario(
    sim: SimConfig,
    robot: RobotParams,
    drivetrain: DrivetrainParams,
    environment: EnvironmentParams,
    controller: ControllerConfig,
) -> SimResult:
    """Run a full bracing-and-drilling mission and return its log."""
    engine = _Engine(sim, robot, drivetrain, environment, controller, tension_mode=False)
    return engine.run().result


def run_tension_test(
    sim: SimConfig,
    robot: RobotParams,
    drivetrain: DrivetrainParams,
    environment: EnvironmentParams,
    controller: ControllerConfig,
) -> TensionResult:
    """Brace inside the frame, release the holding fixture, settle under
    gravity, and report whether the body stayed put."""
    engine = _Engine(sim, robot, drivetrain, environment, controller, tension_mode=True)
    return engine.run()


class _Engine:
    def __init__(self, sim, robot, drivetrain, environment, controller, tension_mode):
        _validate_mission_configs(sim, controller)
        self.sim = sim
        self.robot = robot
        self.drivetrain = drivetrain
        self.env = environment
        self.controller = controller
        self.tension_mode = tension_mode

        x, y, phi = sim.initial_pose
        self.body = BodyState(x=x, y=y, phi=phi)
        self.joints = tuple(JointState(extension=e) for e in sim.initial_extensions)
        self.drill_feed = 0.0
        self.drill_align = 0.0
        self.ctrl_state = ControllerState()
        self.commands = CommandSet(
            rotation_targets=controller.open_targets,
            extension_velocities=(0.0, 0.0, 0.0),
            drill_align_target=controller.drill_align_target,
        )
        self.trackers = {name: _ContactTracker() for name in ("left", "central", "right", "drill")}
        self.noise = random.Random(sim.seed) if sim.sensor_noise_std > 0.0 else None
        self.control_ratio = max(1, round(controller.control_period / sim.dt))

        self.release_time: float | None = None
        self.release_pose: tuple[float, float] | None = None
        self.release_contacts: list[ContactState] = []
        self.max_drift = 0.0
        self.was_pinned = True

    def _drill_tip(self) -> tuple[float, float]:
        angle = self.body.phi + math.pi + self.drill_align
        reach = self.env.drill.mount_offset + self.drill_feed
        return (
            self.body.x + reach * math.cos(angle),
            self.body.y + reach * math.sin(angle),
        )

    def _pinned(self, t: float) -> bool:
        mode = self.sim.hold_mode
        if mode == HOLD_NEVER:
            return False
        if mode == HOLD_RELEASE_TIME:
            return t < self.sim.hold_release_time
        # fixed_until_all_contact: the deployment fixture lets go once the
        # robot holds itself -- at full contact for missions, after hard
        # bracing for the tension test (the frame experiment lifts the
        # support only once the brace is complete).
        if self.tension_mode:
            return self.ctrl_state.phase in (ctl.OPENING, ctl.INITIAL_BRACING, ctl.HARD_BRACING)
        return not all(self.ctrl_state.contact_latches)

    def run(self) -> TensionResult:
        sim, robot, env, controller = self.sim, self.robot, self.env, self.controller
        dt = sim.dt
        n_steps = max(1, round(sim.duration / dt))
        records: list[SimLogRecord] = []
        contact_trace = []
        transitions: dict[str, float] = {self.ctrl_state.phase_token: 0.0}
        peaks = {"left": 0.0, "center": 0.0, "right": 0.0, "drill": 0.0}
        hard_brace_contacts: list[ContactState] = []
        last_token = self.ctrl_state.phase_token
        outcome = "duration_end"
        end_time = 0.0

        for k in range(n_steps):
            t = k * dt

            mounts, dirs, tips = _leg_geometry(self.body, self.joints, robot)
            leg_contacts = []
            for name, tip in zip(("left", "central", "right"), tips):
                n_f, t_f, normal, depth = _tip_contact(tip, self.trackers[name], env, dt)
                leg_contacts.append((name, tip, n_f, t_f, normal, depth))

            # Drill bit: spinning -> axial cutting reaction on the body;
            # stopped -> an ordinary penalty contact at the bit tip.
            drill_tip = self._drill_tip()
            drill_angle = self.body.phi + math.pi + self.drill_align
            drill_u = (math.cos(drill_angle), math.sin(drill_angle))
            if self.commands.drill_rotation_on:
                depth_d, _ = signed_penetration(drill_tip, env.tunnel)
                self.trackers["drill"].prev_depth = depth_d
                self.trackers["drill"].prev_tip = drill_tip
                self.trackers["drill"].anchor = None
                drill_force = drill_reaction(
                    depth_d, replace(env.drill, rotation_active=True)
                )
                drill_wrench_force = (-drill_force * drill_u[0], -drill_force * drill_u[1])
                drill_contact = None
            else:
                n_d, t_d, normal_d, depth_d = _tip_contact(drill_tip, self.trackers["drill"], env, dt)
                drill_force = n_d
                drill_wrench_force = None
                drill_contact = (drill_tip, n_d, t_d, normal_d, depth_d)

            leg_forces = (leg_contacts[0][2], leg_contacts[1][2], leg_contacts[2][2])

            if k % self.control_ratio == 0:
                snapshot = make_snapshot(
                    t, leg_forces, drill_force, self.joints, self.drivetrain,
                    self.noise, sim.sensor_noise_std,
                )
                self.ctrl_state, self.commands = ctl.fsm_step(self.ctrl_state, snapshot, controller)
                if (
                    self.ctrl_state.phase == ctl.DRILLING
                    and depth_d >= controller.drill_target_depth
                ):
                    self.ctrl_state = ctl.halt_state(self.ctrl_state, ctl.HALT_COMPLETE, t)
                    self.commands = ctl.all_stop(controller, snapshot)
                token = self.ctrl_state.phase_token
                if token != last_token:
                    transitions[token] = t
                    if token == ctl.DRILLING:
                        hard_brace_contacts = self._contact_states(leg_contacts)
                    last_token = token

            for name, force in zip(("left", "center", "right"), leg_forces):
                if force > peaks[name]:
                    peaks[name] = force
            if drill_force > peaks["drill"]:
                peaks["drill"] = drill_force

            if k % sim.log_decimation == 0:
                ratios = force_ratios(*leg_forces)
                records.append(SimLogRecord(
                    t=t,
                    phase=self.ctrl_state.phase_token,
                    f_left=leg_forces[0], f_center=leg_forces[1], f_right=leg_forces[2],
                    f_drill=drill_force,
                    l_left=self.joints[0].extension,
                    l_center=self.joints[1].extension,
                    l_right=self.joints[2].extension,
                    theta_left=self.joints[0].rotation,
                    theta_right=self.joints[2].rotation,
                    drill_depth=depth_d,
                    body_x=self.body.x, body_y=self.body.y, body_phi=self.body.phi,
                    ratio_left=ratios[0], ratio_center=ratios[1], ratio_right=ratios[2],
                ))
                trace = [
                    {"leg": name, "normal_force": n_f, "tangential_force": t_f,
                     "normal": normal, "depth": depth, "in_contact": n_f > 0.0}
                    for name, _tip, n_f, t_f, normal, depth in leg_contacts
                ]
                if drill_contact is not None:
                    trace.append({
                        "leg": "drill", "normal_force": drill_contact[1],
                        "tangential_force": drill_contact[2], "normal": drill_contact[3],
                        "depth": drill_contact[4], "in_contact": drill_contact[1] > 0.0,
                    })
                contact_trace.append((t, trace))

            end_time = t
            if self.ctrl_state.phase == ctl.HALTED:
                outcome = self.ctrl_state.phase_token
                break

            # Actuate joints from the latched command set.
            new_joints = []
            for i, name in enumerate(("left", "central", "right")):
                joint = self.joints[i]
                force_vec = self._force_vector(leg_contacts[i])
                axial_load = max(0.0, -(force_vec[0] * dirs[i][0] + force_vec[1] * dirs[i][1]))
                joint = linear_actuator_step(
                    joint, self.commands.extension_velocities[i], axial_load, dt,
                    self.drivetrain.actuator,
                )
                if i != 1:
                    target = self.commands.rotation_targets[0 if i == 0 else 1]
                    torque = self._joint_torque(mounts[i], leg_contacts[i])
                    joint = rotary_joint_step(
                        joint, target, torque, dt,
                        self.drivetrain.gearbox, self.drivetrain.rotary_rate_limit,
                    )
                    if joint.rotation < robot.theta_min:
                        joint = replace(joint, rotation=robot.theta_min, rotation_rate=0.0)
                    elif joint.rotation > robot.theta_max:
                        joint = replace(joint, rotation=robot.theta_max, rotation_rate=0.0)
                new_joints.append(joint)
            self.joints = tuple(new_joints)

            # Drill feed stage and alignment joint.
            feed_v = max(-env.drill.feed_speed, min(env.drill.feed_speed, self.commands.drill_feed_velocity))
            self.drill_feed = max(0.0, min(env.drill.stroke, self.drill_feed + feed_v * dt))
            align_state = rotary_joint_step(
                JointState(extension=0.0, rotation=self.drill_align),
                self.commands.drill_align_target, 0.0, dt,
                self.drivetrain.gearbox, self.drivetrain.rotary_rate_limit,
            )
            self.drill_align = align_state.rotation

            # Net wrench about the body centre.
            fx = fy = mz = 0.0
            for (name, tip, n_f, t_f, normal, _depth) in leg_contacts:
                if n_f == 0.0 and t_f == 0.0:
                    continue
                fvx = n_f * normal[0] + t_f * (-normal[1])
                fvy = n_f * normal[1] + t_f * normal[0]
                rx, ry = tip[0] - self.body.x, tip[1] - self.body.y
                fx += fvx
                fy += fvy
                mz += rx * fvy - ry * fvx
            if drill_wrench_force is not None:
                # Cutting reaction acts along the drill axis through the body.
                fx += drill_wrench_force[0]
                fy += drill_wrench_force[1]
            elif drill_contact is not None and (drill_contact[1] or drill_contact[2]):
                _tip, n_d, t_d, normal_d, _ = drill_contact
                fvx = n_d * normal_d[0] + t_d * (-normal_d[1])
                fvy = n_d * normal_d[1] + t_d * normal_d[0]
                rx, ry = drill_tip[0] - self.body.x, drill_tip[1] - self.body.y
                fx += fvx
                fy += fvy
                mz += rx * fvy - ry * fvx
            fy -= robot.body_mass * sim.gravity

            pinned = self._pinned(t)
            if self.was_pinned and not pinned:
                self.release_time = t
                self.release_pose = (self.body.x, self.body.y)
                if not self.release_contacts:
                    self.release_contacts = self._contact_states(leg_contacts)
            self.was_pinned = pinned

            self.body = integrate_step(
                self.body, (fx, fy, mz), dt, robot.body_mass, robot.body_inertia, pinned,
            )

            if self.release_pose is not None:
                drift = math.hypot(self.body.x - self.release_pose[0], self.body.y - self.release_pose[1])
                if drift > self.max_drift:
                    self.max_drift = drift

            if self.tension_mode and self.release_time is not None:
                if t - self.release_time >= sim.settle_window:
                    outcome = "settle_complete"
                    break

        last = records[-1] if records else None
        summary = {
            "outcome": outcome,
            "final_time_s": end_time,
            "phase_transitions_s": transitions,
            "peak_forces_n": {k: peaks[k] for k in ("left", "center", "right", "drill")},
            "final_ratios": {
                "left": last.ratio_left if last else 0.0,
                "center": last.ratio_center if last else 0.0,
                "right": last.ratio_right if last else 0.0,
            },
            "hard_bracing_contacts": [
                {
                    "leg": c.leg_id,
                    "point_m": list(c.point),
                    "normal": list(c.normal),
                    "normal_force_n": c.normal_force,
                    "tangential_force_n": c.tangential_force,
                }
                for c in hard_brace_contacts
            ],
        }
        result = SimResult(records=records, outcome=outcome, summary=summary,
                           contact_trace=contact_trace)

        if not self.tension_mode:
            return TensionResult(False, None, None, [], result)

        if self.release_time is None:
            return TensionResult(False, None, None, [], result)
        supported = self.max_drift < sim.drift_threshold
        result.summary["supported"] = supported
        result.summary["max_drift_m"] = self.max_drift
        return TensionResult(
            supported=supported,
            max_drift=self.max_drift,
            release_time=self.release_time,
            release_contacts=self.release_contacts,
            result=result,
        )

    @staticmethod
    def _force_vector(contact) -> tuple[float, float]:
        _name, _tip, n_f, t_f, normal, _depth = contact
        return (
            n_f * normal[0] + t_f * (-normal[1]),
            n_f * normal[1] + t_f * normal[0],
        )

    def _joint_torque(self, mount, contact) -> float:
        _name, tip, *_ = contact
        fvx, fvy = self._force_vector(contact)
        rx, ry = tip[0] - mount[0], tip[1] - mount[1]
        return rx * fvy - ry * fvx

    def _contact_states(self, leg_contacts) -> list[ContactState]:
        out = []
        for name, tip, n_f, t_f, normal, depth in leg_contacts:
            out.append(ContactState(
                leg_id=name,
                in_contact=n_f > 0.0,
                normal=normal,
                normal_force=n_f,
                tangential_force=t_f,
                point=tip,
            ))
        return out


def run_step_response(
    target: float,
    drivetrain: DrivetrainParams,
    dt: float = 0.001,
    duration: float = 4.0,
) -> StepResponseResult:
    """Step-command a single rotary joint and track true vs encoder angle.

    Rise time is the first instant the true angle is within 0.02 rad of the
    target (the prototype's reported estimate accuracy).
    """
    if dt <= 0.0 or duration <= 0.0:
        raise ConfigError("dt and duration must be positive")
    joint = JointState(extension=drivetrain.actuator.base_length)
    records = []
    rise_time = None
    max_err = 0.0
    n_steps = max(1, round(duration / dt))
    for k in range(n_steps + 1):
        t = k * dt
        enc = encoder_read(joint.rotation, drivetrain.encoder)
        err = abs(enc - joint.rotation)
        if err > max_err:
            max_err = err
        if rise_time is None and abs(joint.rotation - target) <= 0.02:
            rise_time = t
        records.append((t, target, joint.rotation, enc))
        if k == n_steps:
            break
        joint = rotary_joint_step(
            joint, target, 0.0, dt, drivetrain.gearbox, drivetrain.rotary_rate_limit
        )
    return StepResponseResult(records=records, rise_time=rise_time, max_encoder_error=max_err)
