"""Command-line entry point.

Subcommands: simulate, workspace, torque, step-response, tension-test,
schema. Scenario arguments accept file paths or bundled scenario names
(`tribrace simulate pentagon_drill`). Exit codes: 0 success, 1 config or
parse error, 2 safety halt, 3 negative scenario result.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

from .drivetrain import gearbox_output_torque
from .errors import TribraceError
from .kinematics import workspace_region
from .scenario import (
    KINDS,
    bundled_scenario_names,
    default_document,
    load_scenario,
)
from .simulator import (
    KIND_MISSION,
    KIND_STEP,
    KIND_TENSION,
    KIND_WORKSPACE,
    LOG_COLUMNS,
    run_scenario,
    run_step_response,
    run_tension_test,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SAFETY = 2
EXIT_NEGATIVE = 3


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return f"{value:.9g}"


def write_log_csv(records, path: Path):
    lines = [",".join(LOG_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.row()))
    path.write_text("\n".join(lines) + "\n")


def write_json(payload: dict, path: Path):
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _outdir_for(base: Path, name: str, multi: bool) -> Path:
    out = base / name if multi else base
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate_one(path: str, out_base: str, multi: bool, dry_run: bool) -> int:
    scenario = load_scenario(path)
    if scenario.kind != KIND_MISSION:
        raise TribraceError(
            f"{path}: scenario kind {scenario.kind!r} cannot be simulated; "
            f"expected {KIND_MISSION!r}"
        )
    if dry_run:
        print(json.dumps(scenario.document, indent=2))
        return EXIT_OK
    result = run_scenario(
        scenario.sim, scenario.robot, scenario.drivetrain,
        scenario.environment, scenario.controller,
    )
    out = _outdir_for(Path(out_base), scenario.name, multi)
    write_log_csv(result.records, out / "log.csv")
    write_json(result.summary, out / "summary.json")
    if result.outcome == "halted_safety_overload":
        return EXIT_SAFETY
    return EXIT_OK


def _cmd_workspace_one(path: str, out_base: str, multi: bool, dry_run: bool) -> int:
    scenario = load_scenario(path)
    if scenario.kind != KIND_WORKSPACE:
        raise TribraceError(f"{path}: expected a {KIND_WORKSPACE!r} scenario")
    if dry_run:
        print(json.dumps(scenario.document, indent=2))
        return EXIT_OK
    region = workspace_region(
        scenario.workspace_anchors, scenario.robot, scenario.workspace_resolution
    )
    out = _outdir_for(Path(out_base), scenario.name, multi)
    lines = ["x_m,y_m"]
    for x, y in region.feasible_points:
        lines.append(f"{_fmt(x)},{_fmt(y)}")
    (out / "workspace.csv").write_text("\n".join(lines) + "\n")
    write_json(
        {
            "classification": region.classification,
            "resolution_m": region.resolution,
            "count": int(len(region.feasible_points)),
            "anchors_m": [list(a) for a in scenario.workspace_anchors],
            "l_min_m": scenario.robot.l_min,
            "l_max_m": scenario.robot.l_max,
        },
        out / "workspace.json",
    )
    return EXIT_OK


def _cmd_step_one(path: str, out_base: str, multi: bool, dry_run: bool) -> int:
    scenario = load_scenario(path)
    if scenario.kind != KIND_STEP:
        raise TribraceError(f"{path}: expected a {KIND_STEP!r} scenario")
    if dry_run:
        print(json.dumps(scenario.document, indent=2))
        return EXIT_OK
    response = run_step_response(
        scenario.step_target, scenario.drivetrain,
        dt=scenario.step_dt, duration=scenario.step_duration,
    )
    out = _outdir_for(Path(out_base), scenario.name, multi)
    lines = ["t_s,commanded_rad,true_rad,encoder_rad"]
    for row in response.records:
        lines.append(",".join(_fmt(v) for v in row))
    (out / "step.csv").write_text("\n".join(lines) + "\n")
    write_json(
        {
            "target_rad": scenario.step_target,
            "rise_time_s": response.rise_time,
            "max_encoder_error_rad": response.max_encoder_error,
        },
        out / "step.json",
    )
    return EXIT_OK


def _cmd_tension_one(path: str, out_base: str, multi: bool, dry_run: bool) -> int:
    scenario = load_scenario(path)
    if scenario.kind != KIND_TENSION:
        raise TribraceError(f"{path}: expected a {KIND_TENSION!r} scenario")
    if dry_run:
        print(json.dumps(scenario.document, indent=2))
        return EXIT_OK
    tension = run_tension_test(
        scenario.sim, scenario.robot, scenario.drivetrain,
        scenario.environment, scenario.controller,
    )
    out = _outdir_for(Path(out_base), scenario.name, multi)
    write_log_csv(tension.result.records, out / "log.csv")
    write_json(
        {
            "supported": tension.supported,
            "max_drift_m": tension.max_drift,
            "release_time_s": tension.release_time,
            "contacts_at_release": [
                {
                    "leg": c.leg_id,
                    "in_contact": c.in_contact,
                    "point_m": list(c.point),
                    "normal": list(c.normal),
                    "normal_force_n": c.normal_force,
                    "tangential_force_n": c.tangential_force,
                }
                for c in tension.release_contacts
            ],
        },
        out / "tension.json",
    )
    return EXIT_OK if tension.supported else EXIT_NEGATIVE


_RUNNERS = {
    "simulate": _cmd_simulate_one,
    "workspace": _cmd_workspace_one,
    "step-response": _cmd_step_one,
    "tension-test": _cmd_tension_one,
}


def _run_one(command: str, path: str, out: str, multi: bool, dry_run: bool) -> int:
    try:
        return _RUNNERS[command](path, out, multi, dry_run)
    except TribraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _batch(command: str, paths, out: str, jobs: int, dry_run: bool) -> int:
    multi = len(paths) > 1
    if jobs <= 1 or len(paths) == 1:
        return max(_run_one(command, p, out, multi, dry_run) for p in paths)
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one, command, p, out, multi, dry_run) for p in paths]
        return max(f.result() for f in futures)


def _add_scenario_command(sub, name: str, help_text: str):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("scenarios", nargs="+", metavar="SCENARIO",
                   help="scenario file path or bundled scenario name")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--dry-run", action="store_true",
                   help="validate and print the resolved config, write nothing")
    p.add_argument("--jobs", type=int, default=1,
                   help="run multiple scenario files concurrently")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tribrace",
        description="Planar simulator for a tri-leg self-bracing drilling robot.",
        epilog="bundled scenarios: " + ", ".join(bundled_scenario_names()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_scenario_command(sub, "simulate", "run a bracing-and-drilling mission")
    _add_scenario_command(sub, "workspace", "compute the reachable body workspace")
    _add_scenario_command(sub, "step-response", "rotary joint step response")
    _add_scenario_command(sub, "tension-test", "brace in a frame, release, check support")

    torque = sub.add_parser("torque", help="gearbox output torque t_in * ratio * eta")
    torque.add_argument("t_in", type=float)
    torque.add_argument("ratio", type=float)
    torque.add_argument("eta", type=float)

    schema = sub.add_parser("schema", help="print the defaulted scenario document")
    schema.add_argument("kind", nargs="?", default=KIND_MISSION, choices=KINDS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "torque":
        try:
            print(f"{gearbox_output_torque(args.t_in, args.ratio, args.eta):.6f}")
        except TribraceError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    if args.command == "schema":
        print(json.dumps(default_document(args.kind), indent=2))
        return EXIT_OK

    return _batch(args.command, args.scenarios, args.out, args.jobs, args.dry_run)


if __name__ == "__main__":
    sys.exit(main())
