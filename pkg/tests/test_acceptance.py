"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion.
"""

import json
import math
import statistics
import time

import numpy as np
import pytest

from tribrace.cli import main
from tribrace.drivetrain import DrivetrainParams, gearbox_output_torque, rotary_joint_step
from tribrace.environment import ContactState, static_equilibrium
from tribrace.kinematics import JointState, RobotConfiguration, workspace_region
from tribrace.scenario import load_scenario
from tribrace.simulator import run_scenario, run_step_response, run_tension_test


def _ok(name):
    print(f"ACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def pentagon():
    s = load_scenario("pentagon_drill")
    t0 = time.perf_counter()
    res = run_scenario(s.sim, s.robot, s.drivetrain, s.environment, s.controller)
    return s, res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def wood():
    s = load_scenario("wood_frame")
    return s, run_tension_test(s.sim, s.robot, s.drivetrain, s.environment, s.controller)


@pytest.fixture(scope="module")
def wood_frictionless():
    s = load_scenario("wood_frame_frictionless")
    return s, run_tension_test(s.sim, s.robot, s.drivetrain, s.environment, s.controller)


def test_eq1_exactness():
    """Output torque at the conservative prototype operating point."""
    gearbox_output_torque(1.765, 80.0, 0.38)  # warm up
    t0 = time.perf_counter()
    value = gearbox_output_torque(1.765, 80.0, 0.38)
    elapsed = time.perf_counter() - t0
    assert abs(value - 53.656) <= 1e-9
    assert elapsed < 1e-3
    _ok("eq1-exactness")


# --- independent brute-force workspace oracle (complex arithmetic, separate
# classification code path), evaluated at twice the artifact resolution.

def _oracle_feasible_grid(anchors, robot, resolution):
    al, ac, ar = (complex(a[0], a[1]) for a in anchors)
    res = resolution
    xs = np.arange(
        math.ceil((min(z.real for z in (al, ac, ar)) - robot.l_max) / res - 1e-12),
        math.floor((max(z.real for z in (al, ac, ar)) + robot.l_max) / res + 1e-12) + 1,
    ) * res
    ys = np.arange(
        math.ceil((min(z.imag for z in (al, ac, ar)) - robot.l_max) / res - 1e-12),
        math.floor((max(z.imag for z in (al, ac, ar)) + robot.l_max) / res + 1e-12) + 1,
    ) * res
    gx, gy = np.meshgrid(xs, ys)
    p = gx + 1j * gy
    ok = np.ones(p.shape, dtype=bool)
    for z in (al, ac, ar):
        d = np.abs(z - p)
        ok &= (d >= robot.l_min - 1e-9) & (d <= robot.l_max + 1e-9)
    to_central = ac - p
    for z in (al, ar):
        bearing = np.angle((z - p) * np.conj(to_central))
        ok &= (bearing >= robot.theta_min) & (bearing <= robot.theta_max)
    pts = np.column_stack((gx[ok], gy[ok]))
    return pts


def _oracle_classify(points, resolution):
    if len(points) == 0:
        return "empty"
    centered = points - points.mean(axis=0)
    if len(points) == 1:
        e1 = e2 = 0.0
    else:
        cov = centered.T @ centered
        _, vecs = np.linalg.eigh(cov)
        proj = centered @ vecs
        spans = np.sort(proj.max(axis=0) - proj.min(axis=0))[::-1]
        e1, e2 = float(spans[0]), float(spans[1])
    if e1 <= resolution:
        return "single-point"
    if e2 <= 2.0 * resolution < e1:
        return "line-like"
    return "area"


def test_workspace_degeneracies():
    expected = {
        "fig5a_min": "single-point",
        "fig5b_max": "single-point",
        "fig5c_mid": "area",
        "fig5d_mid": "area",
        "fig5e_mid": "area",
        "fig5f_mirror": "line-like",
    }
    artifact_time = 0.0
    for name, want in expected.items():
        s = load_scenario(name)
        t0 = time.perf_counter()
        region = workspace_region(s.workspace_anchors, s.robot, s.workspace_resolution)
        artifact_time += time.perf_counter() - t0
        assert region.classification == want, f"{name}: got {region.classification}"
        if want == "area":
            assert len(region.feasible_points) > 10  # positive sampled extent
        # independent oracle at 2x finer resolution agrees on the class
        fine = _oracle_feasible_grid(s.workspace_anchors, s.robot, s.workspace_resolution / 2)
        assert _oracle_classify(fine, s.workspace_resolution / 2) == want, name
        # and every artifact point is feasible for the oracle predicate
        if len(region.feasible_points):
            coarse = {(round(x, 9), round(y, 9)) for x, y in fine}
            for x, y in region.feasible_points:
                assert (round(x, 9), round(y, 9)) in coarse, (name, x, y)
    assert artifact_time < 30.0
    _ok("workspace-degeneracies")


def test_fsm_mission_ordering(pentagon):
    s, res, elapsed = pentagon
    order = []
    for r in res.records:
        if not r.phase.startswith("halted") and r.phase not in order:
            order.append(r.phase)
    assert order == ["opening", "initial_bracing", "hard_bracing", "drilling"]

    transitions = res.summary["phase_transitions_s"]
    t_hard = transitions["hard_bracing"]
    t_drill = transitions["drilling"]
    # every leg showed first contact (latch evidence) before hard bracing
    for leg in ("f_left", "f_center", "f_right"):
        pre = [getattr(r, leg) for r in res.records if r.t <= t_hard]
        assert max(pre) >= s.controller.f_contact
    # every leg at or above the brace threshold at the hard->drill instant
    at_transition = [r for r in res.records if r.t == t_drill][0]
    assert min(at_transition.f_left, at_transition.f_center, at_transition.f_right) >= s.controller.f_brace
    assert elapsed < 60.0
    _ok("fsm-mission-ordering")


def test_force_distribution(pentagon):
    s, res, _ = pentagon
    hard = [r for r in res.records
            if r.phase == "hard_bracing" and (r.f_left + r.f_center + r.f_right) > 0]
    drill = [r for r in res.records
             if r.phase == "drilling" and (r.f_left + r.f_center + r.f_right) > 0]
    assert hard and drill

    central_hard = statistics.mean(r.ratio_center for r in hard)
    left_hard = statistics.mean(r.ratio_left for r in hard)
    right_hard = statistics.mean(r.ratio_right for r in hard)
    assert abs(central_hard - 0.50) <= 0.10
    assert abs(left_hard - 0.25) <= 0.05
    assert abs(right_hard - 0.25) <= 0.05

    central_drill = statistics.mean(r.ratio_center for r in drill)
    left_drill = statistics.mean(r.ratio_left for r in drill)
    right_drill = statistics.mean(r.ratio_right for r in drill)
    assert central_drill > central_hard
    assert left_drill < left_hard
    assert right_drill < right_hard

    # static force-balance oracle on the braced contact set: the simulated
    # forces must themselves balance, and the equilibrium solver must agree
    # the geometry admits a supported state.
    contacts = res.summary["hard_bracing_contacts"]
    fx = sum(c["normal_force_n"] * c["normal"][0]
             + c["tangential_force_n"] * (-c["normal"][1]) for c in contacts)
    fy = sum(c["normal_force_n"] * c["normal"][1]
             + c["tangential_force_n"] * c["normal"][0] for c in contacts)
    assert math.hypot(fx, fy) <= 0.5  # the equilibrium force tolerance

    states = [
        ContactState(leg_id=c["leg"], in_contact=True, normal=tuple(c["normal"]),
                     normal_force=c["normal_force_n"],
                     tangential_force=c["tangential_force_n"], point=tuple(c["point_m"]))
        for c in contacts
    ]
    config = RobotConfiguration(
        body_pose=s.sim.initial_pose,
        legs=(JointState(0.8), JointState(0.8), JointState(0.8)),
    )
    eq = static_equilibrium(config, states, s.sim.gravity, (0.0, 0.0, 0.0),
                            s.robot, mu=s.environment.contact.friction_mu)
    assert eq.supported
    _ok("force-distribution")


def test_safety_halt_latency(pentagon):
    s, res, _ = pentagon
    f_safety = s.controller.f_safety
    offending = [r for r in res.records
                 if max(r.f_left, r.f_center, r.f_right) > f_safety]
    assert offending, "mission never crossed the safety threshold"
    first = offending[0]
    # the very record that first shows the overload is already halted: the
    # command set emitted for that snapshot is the all-stop
    assert first.phase == "halted_safety_overload"
    t_halt = res.summary["phase_transitions_s"]["halted_safety_overload"]
    assert t_halt - first.t <= s.controller.control_period + 1e-12
    _ok("safety-halt-latency")


def test_step_response():
    t0 = time.perf_counter()
    resp = run_step_response(1.57, DrivetrainParams(), dt=0.001, duration=4.0)
    elapsed = time.perf_counter() - t0
    assert resp.rise_time is not None
    assert 1.8 <= resp.rise_time <= 2.2
    assert resp.max_encoder_error <= 0.02
    assert elapsed < 5.0
    _ok("step-response")


def test_self_locking():
    gear = DrivetrainParams().gearbox
    assert gear.self_locking
    joint = JointState(extension=0.625, rotation=0.5)
    dt = 0.001
    for k in range(10_000):  # 10 simulated seconds
        torque = 53.0 * math.sin(2.0 * math.pi * k * dt)  # up to 53 N*m
        joint = rotary_joint_step(joint, 0.5, torque, dt, gear, 0.785)
    assert joint.rotation == 0.5  # exactly zero motion
    _ok("self-locking")


def test_tension_test(wood, wood_frictionless):
    _, supported_case = wood
    assert supported_case.supported is True
    assert supported_case.max_drift < 0.001
    _, control_case = wood_frictionless
    assert control_case.supported is False
    _ok("tension-test")


def test_determinism(tmp_path):
    pairs = []
    for i in (1, 2):
        out = tmp_path / f"run{i}"
        code = main(["simulate", "pentagon_drill", "--out", str(out)])
        assert code in (0, 2)
        pairs.append(((out / "log.csv").read_bytes(), (out / "summary.json").read_bytes()))
    assert pairs[0][0] == pairs[1][0]
    assert pairs[0][1] == pairs[1][1]
    _ok("determinism")


def test_contact_invariants(pentagon, wood, wood_frictionless):
    runs = [
        (pentagon[1], pentagon[0].environment.contact.friction_mu),
        (wood[1].result, wood[0].environment.contact.friction_mu),
        (wood_frictionless[1].result, wood_frictionless[0].environment.contact.friction_mu),
    ]
    for res, mu in runs:
        for r in res.records:
            for f in (r.f_left, r.f_center, r.f_right, r.f_drill):
                assert f >= 0.0
            total = r.f_left + r.f_center + r.f_right
            if total > 0.0:
                assert abs(r.ratio_left + r.ratio_center + r.ratio_right - 1.0) <= 1e-12
            else:
                assert (r.ratio_left, r.ratio_center, r.ratio_right) == (0.0, 0.0, 0.0)
        for _t, trace in res.contact_trace:
            for e in trace:
                assert e["normal_force"] >= 0.0
                assert abs(e["tangential_force"]) <= mu * e["normal_force"] + 1e-9
                if not e["in_contact"]:
                    assert e["normal_force"] == 0.0 and e["tangential_force"] == 0.0
    _ok("contact-invariants")
