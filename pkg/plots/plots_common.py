"""Shared plumbing for the offline plot scripts.

The scripts consume only the simulator's documented file formats. Any schema
deviation (missing/extra/reordered columns, NaN cells, empty files) is an
error: these tools never guess.
"""

from __future__ import annotations

import csv
import math
import sys

LOG_COLUMNS = [
    "t_s", "phase",
    "f_left_n", "f_center_n", "f_right_n", "f_drill_n",
    "l_left_m", "l_center_m", "l_right_m",
    "theta_left_rad", "theta_right_rad",
    "drill_depth_m",
    "body_x_m", "body_y_m", "body_phi_rad",
    "ratio_left", "ratio_center", "ratio_right",
]

STEP_COLUMNS = ["t_s", "commanded_rad", "true_rad", "encoder_rad"]
WORKSPACE_COLUMNS = ["x_m", "y_m"]

# Fixed phase colours for the shaded mission backgrounds.
PHASE_COLORS = {
    "opening": "#9e9e9e",
    "initial_bracing": "#1f77b4",
    "hard_bracing": "#ffbf00",
    "drilling": "#d62728",
}
HALT_COLOR = "#555555"


class SchemaError(Exception):
    pass


def fmt9(value: float) -> str:
    """The simulator's wire format: 9 significant digits."""
    return f"{value:.9g}"


def phase_color(phase: str) -> str:
    return PHASE_COLORS.get(phase, HALT_COLOR)


def read_strict_csv(path: str, columns: list[str], text_columns=("phase",)) -> list[dict]:
    """Read a delimited file whose header must equal `columns` exactly.

    Numeric cells are parsed to float; NaN or unparsable cells are schema
    errors, as is an empty body.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}")
        extra = [c for c in header if c not in columns]
        if extra:
            raise SchemaError(f"{path}: unknown column {extra[0]!r}")
        if header != columns:
            raise SchemaError(f"{path}: columns out of order")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(columns):
                raise SchemaError(f"{path}:{lineno}: expected {len(columns)} cells")
            row = {}
            for name, cell in zip(columns, raw):
                if name in text_columns:
                    row[name] = cell
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: bad number in {name!r}: {cell!r}") from None
                if math.isnan(value):
                    raise SchemaError(f"{path}:{lineno}: NaN in column {name!r}")
                row[name] = value
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no records")
    return rows


def phase_runs(rows: list[dict]) -> list[tuple[str, float, float]]:
    """Contiguous (phase, t_start, t_end) runs in log order, unmodified."""
    runs = []
    for row in rows:
        if runs and runs[-1][0] == row["phase"]:
            runs[-1] = (runs[-1][0], runs[-1][1], row["t_s"])
        else:
            runs.append((row["phase"], row["t_s"], row["t_s"]))
    return runs


def run_cli(render, argv, usage: str) -> int:
    """Argument/exit-code wrapper shared by the three scripts."""
    if len(argv) != 2:
        print(usage, file=sys.stderr)
        return 1
    try:
        render(argv[0], argv[1])
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
