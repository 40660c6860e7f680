"""Strict JSON scenario files: schema, defaults, parsing, bundled library.

Every physical quantity carries a unit suffix in its key (_m, _n, _rad, _s,
combinations thereof). Unknown keys are rejected with a dotted-path error so
typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .controller import ControllerConfig
from .drivetrain import (
    DrivetrainParams,
    EncoderModel,
    GearboxParams,
    LimitSwitchSet,
    LinearActuatorParams,
)
from .environment import ContactParams, DrillParams, EnvironmentParams, TunnelCrossSection
from .errors import ConfigError, GeometryError
from .kinematics import RobotParams
from .simulator import KIND_MISSION, KIND_STEP, KIND_TENSION, KIND_WORKSPACE, SimConfig

KINDS = (KIND_MISSION, KIND_TENSION, KIND_STEP, KIND_WORKSPACE)

_HALF_PI = math.pi / 2

# Leaf spec: (type, default). Types: number, int, bool, string, vec2, vec3,
# points (list of [x, y]), points3 (exactly three points).
_ROBOT = {
    "l_min_m": ("number", 0.625),
    "l_max_m": ("number", 1.125),
    "theta_min_rad": ("number", -_HALF_PI),
    "theta_max_rad": ("number", _HALF_PI),
    "leg_mount_offsets_m": ("points3", [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
    "body_mass_kg": ("number", 15.0),
    "body_inertia_kg_m2": ("number", 2.5),
}

_DRIVETRAIN = {
    "actuator": {
        "base_length_m": ("number", 0.625),
        "stroke_m": ("number", 0.5),
        "max_push_force_n": ("number", 1000.0),
        "max_speed_m_per_s": ("number", 0.01),
    },
    "gearbox": {
        "stage1_ratio": ("number", 2.0),
        "stage2_ratio": ("number", 40.0),
        "efficiency_eta": ("number", 0.38),
        "motor_stall_torque_nm": ("number", 1.765),
        "self_locking": ("bool", True),
    },
    "encoder": {
        "quantization_step_rad": ("number", 0.02),
    },
    # Trip angles default to the active rotation limits; null means "inherit".
    "limit_switches": {
        "lower_trip_angle_rad": ("number_or_null", None),
        "upper_trip_angle_rad": ("number_or_null", None),
    },
    "rotary_rate_limit_rad_per_s": ("number", 0.785),
}

_ENVIRONMENT = {
    "contact": {
        "stiffness_n_per_m": ("number", 1.0e5),
        "damping_n_s_per_m": ("number", 2.0e3),
        "friction_mu": ("number", 0.6),
        "tangential_damping_n_s_per_m": ("number", 700.0),
    },
    "drill": {
        "feed_gain_n_per_m": ("number", 5.0e4),
        "reaction_cap_n": ("number", 2000.0),
        "feed_speed_m_per_s": ("number", 0.015),
        "mount_offset_m": ("number", 0.55),
        "stroke_m": ("number", 0.3),
    },
    "regularization_velocity_m_per_s": ("number", 1.0e-3),
}

_CONTROLLER = {
    "open_targets_rad": ("vec2", [math.pi / 3, -math.pi / 3]),
    "brace_speed_m_per_s": ("number", 0.01),
    "hard_brace_speed_m_per_s": ("number", 0.002),
    "f_contact_n": ("number", 8.0),
    "f_brace_n": ("number", 120.0),
    "sustain_duration_s": ("number", 1.0),
    "f_safety_n": ("number", 1200.0),
    "drill_align_target_rad": ("number", 0.0),
    "drill_feed_speed_m_per_s": ("number", 0.005),
    "control_period_s": ("number", 0.01),
    "open_angle_tolerance_rad": ("number", 0.03),
    "max_extension_m": ("number", 1.125),
    "drill_target_depth_m": ("number", 0.05),
}

_SIM = {
    "dt_s": ("number", 0.001),
    "duration_s": ("number", 40.0),
    "gravity_m_per_s2": ("number", 9.81),
    "hold_mode": ("string", "fixed_until_all_contact"),
    "hold_release_time_s": ("number", 0.0),
    "seed": ("int", 0),
    "initial_pose": {
        "x_m": ("number", 0.0),
        "y_m": ("number", 0.0),
        "phi_rad": ("number", 0.0),
    },
    "initial_extensions_m": ("vec3", [0.625, 0.625, 0.625]),
    "log_decimation": ("int", 10),
    "sensor_noise_std_n": ("number", 0.0),
    "settle_window_s": ("number", 5.0),
    "drift_threshold_m": ("number", 0.001),
}

_TUNNEL = {
    "vertices_m": ("points", [
        [0.75, -0.55], [0.75, 0.55], [-0.15, 0.78], [-0.82, 0.0], [-0.15, -0.78],
    ]),
}

_WORKSPACE = {
    "anchors_m": ("points3", [[0.75, 0.0], [-0.375, 0.649519052838329], [-0.375, -0.649519052838329]]),
    "resolution_m": ("number", 0.005),
}

_STEP = {
    "target_rad": ("number", 1.57),
    "duration_s": ("number", 4.0),
    "dt_s": ("number", 0.001),
}


def _meta_schema(kind: str) -> dict:
    return {
        "name": ("string", "unnamed"),
        "kind": ("string", kind),
        "description": ("string", ""),
    }


def schema_for(kind: str) -> dict:
    if kind in (KIND_MISSION, KIND_TENSION):
        return {
            "meta": _meta_schema(kind),
            "tunnel": _TUNNEL,
            "robot": _ROBOT,
            "drivetrain": _DRIVETRAIN,
            "environment": _ENVIRONMENT,
            "controller": _CONTROLLER,
            "sim": dict(_SIM, scenario_kind=("string", kind)),
        }
    if kind == KIND_WORKSPACE:
        return {"meta": _meta_schema(kind), "robot": _ROBOT, "workspace": _WORKSPACE}
    if kind == KIND_STEP:
        return {"meta": _meta_schema(kind), "drivetrain": _DRIVETRAIN, "step": _STEP}
    raise ConfigError(f"unknown scenario kind {kind!r}")


def default_document(kind: str) -> dict:
    """Fully-defaulted scenario of the given kind; validates round-trip."""
    return _resolve(schema_for(kind), {}, "")


_LEAF_CHECKS = {
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
    "string": lambda v: isinstance(v, str),
    "number_or_null": lambda v: v is None or (isinstance(v, (int, float)) and not isinstance(v, bool)),
}


def _is_point(v) -> bool:
    return (
        isinstance(v, list) and len(v) == 2
        and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)
    )


def _check_leaf(leaf_type: str, value, path: str):
    if leaf_type in _LEAF_CHECKS:
        if not _LEAF_CHECKS[leaf_type](value):
            raise ConfigError(f"{path}: expected {leaf_type}, got {value!r}")
        return
    if leaf_type in ("vec2", "vec3"):
        n = 2 if leaf_type == "vec2" else 3
        if not (isinstance(value, list) and len(value) == n
                and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)):
            raise ConfigError(f"{path}: expected a list of {n} numbers")
        return
    if leaf_type == "points":
        if not (isinstance(value, list) and len(value) >= 3 and all(_is_point(p) for p in value)):
            raise ConfigError(f"{path}: expected a list of at least 3 [x, y] points")
        return
    if leaf_type == "points3":
        if not (isinstance(value, list) and len(value) == 3 and all(_is_point(p) for p in value)):
            raise ConfigError(f"{path}: expected exactly 3 [x, y] points")
        return
    raise AssertionError(f"unhandled leaf type {leaf_type}")


def _resolve(schema: dict, doc: dict, path: str) -> dict:
    """Validate `doc` against `schema`, filling defaults; strict on unknowns."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object")
    for key in doc:
        if key not in schema:
            raise ConfigError(f"{_join(path, key)}: unknown key")
    out = {}
    for key, spec in schema.items():
        child_path = _join(path, key)
        if isinstance(spec, dict):
            out[key] = _resolve(spec, doc.get(key, {}), child_path)
        else:
            leaf_type, default = spec
            if key in doc:
                _check_leaf(leaf_type, doc[key], child_path)
                out[key] = doc[key]
            else:
                out[key] = default
    return out


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


@dataclass(frozen=True)
class Scenario:
    """A fully parsed scenario: typed parameter bundles plus the resolved
    document (for --dry-run echoing)."""

    kind: str
    name: str
    document: dict
    robot: RobotParams | None = None
    drivetrain: DrivetrainParams | None = None
    environment: EnvironmentParams | None = None
    controller: ControllerConfig | None = None
    sim: SimConfig | None = None
    workspace_anchors: tuple | None = None
    workspace_resolution: float | None = None
    step_target: float | None = None
    step_duration: float | None = None
    step_dt: float | None = None


def _build_robot(doc: dict) -> RobotParams:
    return RobotParams(
        l_min=doc["l_min_m"],
        l_max=doc["l_max_m"],
        theta_min=doc["theta_min_rad"],
        theta_max=doc["theta_max_rad"],
        leg_mount_offsets=tuple(tuple(p) for p in doc["leg_mount_offsets_m"]),
        body_mass=doc["body_mass_kg"],
        body_inertia=doc["body_inertia_kg_m2"],
    )


def _build_drivetrain(doc: dict, robot: RobotParams | None) -> DrivetrainParams:
    sw = doc["limit_switches"]
    lower = sw["lower_trip_angle_rad"]
    upper = sw["upper_trip_angle_rad"]
    if lower is None:
        lower = robot.theta_min if robot is not None else -_HALF_PI
    if upper is None:
        upper = robot.theta_max if robot is not None else _HALF_PI
    return DrivetrainParams(
        actuator=LinearActuatorParams(
            base_length=doc["actuator"]["base_length_m"],
            stroke=doc["actuator"]["stroke_m"],
            max_push_force=doc["actuator"]["max_push_force_n"],
            max_speed=doc["actuator"]["max_speed_m_per_s"],
        ),
        gearbox=GearboxParams(
            stage1_ratio=doc["gearbox"]["stage1_ratio"],
            stage2_ratio=doc["gearbox"]["stage2_ratio"],
            efficiency_eta=doc["gearbox"]["efficiency_eta"],
            motor_stall_torque=doc["gearbox"]["motor_stall_torque_nm"],
            self_locking=doc["gearbox"]["self_locking"],
        ),
        encoder=EncoderModel(quantization_step=doc["encoder"]["quantization_step_rad"]),
        switches=LimitSwitchSet(lower_trip_angle=lower, upper_trip_angle=upper),
        rotary_rate_limit=doc["rotary_rate_limit_rad_per_s"],
    )


def _build_environment(doc: dict) -> EnvironmentParams:
    tunnel_doc = doc["tunnel"]
    contact_doc = doc["environment"]["contact"]
    drill_doc = doc["environment"]["drill"]
    return EnvironmentParams(
        tunnel=TunnelCrossSection(vertices=tuple(tuple(p) for p in tunnel_doc["vertices_m"])),
        contact=ContactParams(
            stiffness=contact_doc["stiffness_n_per_m"],
            damping=contact_doc["damping_n_s_per_m"],
            friction_mu=contact_doc["friction_mu"],
            tangential_damping=contact_doc["tangential_damping_n_s_per_m"],
        ),
        drill=DrillParams(
            feed_gain=drill_doc["feed_gain_n_per_m"],
            reaction_cap=drill_doc["reaction_cap_n"],
            feed_speed=drill_doc["feed_speed_m_per_s"],
            mount_offset=drill_doc["mount_offset_m"],
            stroke=drill_doc["stroke_m"],
        ),
        regularization_velocity=doc["environment"]["regularization_velocity_m_per_s"],
    )


def _build_controller(doc: dict) -> ControllerConfig:
    return ControllerConfig(
        open_targets=tuple(doc["open_targets_rad"]),
        brace_speed=doc["brace_speed_m_per_s"],
        hard_brace_speed=doc["hard_brace_speed_m_per_s"],
        f_contact=doc["f_contact_n"],
        f_brace=doc["f_brace_n"],
        sustain_duration=doc["sustain_duration_s"],
        f_safety=doc["f_safety_n"],
        drill_align_target=doc["drill_align_target_rad"],
        drill_feed_speed=doc["drill_feed_speed_m_per_s"],
        control_period=doc["control_period_s"],
        open_angle_tolerance=doc["open_angle_tolerance_rad"],
        max_extension=doc["max_extension_m"],
        drill_target_depth=doc["drill_target_depth_m"],
    )


def _build_sim(doc: dict, kind: str) -> SimConfig:
    if doc["scenario_kind"] != kind:
        raise ConfigError(
            f"sim.scenario_kind: {doc['scenario_kind']!r} does not match meta.kind {kind!r}"
        )
    pose = doc["initial_pose"]
    return SimConfig(
        dt=doc["dt_s"],
        duration=doc["duration_s"],
        gravity=doc["gravity_m_per_s2"],
        hold_mode=doc["hold_mode"],
        hold_release_time=doc["hold_release_time_s"],
        seed=doc["seed"],
        initial_pose=(pose["x_m"], pose["y_m"], pose["phi_rad"]),
        scenario_kind=kind,
        log_decimation=doc["log_decimation"],
        initial_extensions=tuple(doc["initial_extensions_m"]),
        sensor_noise_std=doc["sensor_noise_std_n"],
        settle_window=doc["settle_window_s"],
        drift_threshold=doc["drift_threshold_m"],
    )


def parse_scenario(raw: dict) -> Scenario:
    """Validate a raw JSON document and build the typed parameter bundles."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>: scenario must be a JSON object")
    meta = raw.get("meta", {})
    if not isinstance(meta, dict):
        raise ConfigError("meta: expected an object")
    kind = meta.get("kind", KIND_MISSION)
    if kind not in KINDS:
        raise ConfigError(f"meta.kind: unknown kind {kind!r}")

    doc = _resolve(schema_for(kind), raw, "")
    name = doc["meta"]["name"]
    try:
        if kind in (KIND_MISSION, KIND_TENSION):
            robot = _build_robot(doc["robot"])
            return Scenario(
                kind=kind,
                name=name,
                document=doc,
                robot=robot,
                drivetrain=_build_drivetrain(doc["drivetrain"], robot),
                environment=_build_environment(doc),
                controller=_build_controller(doc["controller"]),
                sim=_build_sim(doc["sim"], kind),
            )
        if kind == KIND_WORKSPACE:
            return Scenario(
                kind=kind,
                name=name,
                document=doc,
                robot=_build_robot(doc["robot"]),
                workspace_anchors=tuple(tuple(p) for p in doc["workspace"]["anchors_m"]),
                workspace_resolution=doc["workspace"]["resolution_m"],
            )
        return Scenario(
            kind=kind,
            name=name,
            document=doc,
            drivetrain=_build_drivetrain(doc["drivetrain"], None),
            step_target=doc["step"]["target_rad"],
            step_duration=doc["step"]["duration_s"],
            step_dt=doc["step"]["dt_s"],
        )
    except GeometryError:
        raise
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc


def bundled_scenario_names() -> list[str]:
    files = resources.files("tribrace.scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario from a file path or a bundled scenario name."""
    path = Path(path_or_name)
    if path.exists():
        text = path.read_text()
    else:
        candidate = str(path_or_name)
        if "/" not in candidate and not candidate.endswith(".json"):
            res = resources.files("tribrace.scenarios").joinpath(candidate + ".json")
            if res.is_file():
                text = res.read_text()
            else:
                raise ConfigError(
                    f"no such scenario file or bundled name: {candidate!r} "
                    f"(bundled: {', '.join(bundled_scenario_names())})"
                )
        else:
            raise ConfigError(f"scenario file not found: {candidate}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return parse_scenario(raw)
