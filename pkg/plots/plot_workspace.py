#!/usr/bin/env python3
"""Render a workspace export: feasible body positions, the three leg annuli,
and the classification annotation. Expects the JSON sidecar next to the CSV.

Usage: plot_workspace.py <workspace.csv> <out.svg>
"""

from __future__ import annotations

import json
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Circle

from plots_common import WORKSPACE_COLUMNS, SchemaError, read_strict_csv, run_cli

SIDECAR_KEYS = ("classification", "resolution_m", "count", "anchors_m", "l_min_m", "l_max_m")
ANNULUS_COLORS = ("#d62728", "#1f77b4", "#2ca02c")  # left, central, right


def _load_sidecar(csv_path: str) -> dict:
    sidecar_path = os.path.splitext(csv_path)[0] + ".json"
    if not os.path.exists(sidecar_path):
        raise SchemaError(f"missing JSON sidecar: {sidecar_path}")
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    for key in SIDECAR_KEYS:
        if key not in sidecar:
            raise SchemaError(f"{sidecar_path}: missing key {key!r}")
    return sidecar


def render(workspace_csv: str, out_image: str) -> None:
    sidecar = _load_sidecar(workspace_csv)
    try:
        rows = read_strict_csv(workspace_csv, WORKSPACE_COLUMNS, text_columns=())
    except SchemaError as exc:
        if sidecar["count"] == 0 and "no records" in str(exc):
            rows = []
        else:
            raise
    if len(rows) != sidecar["count"]:
        raise SchemaError(
            f"{workspace_csv}: {len(rows)} points but sidecar count is {sidecar['count']}"
        )

    fig, ax = plt.subplots(figsize=(7.0, 7.0))
    for anchor, color, name in zip(sidecar["anchors_m"], ANNULUS_COLORS, ("left", "central", "right")):
        for radius, style in ((sidecar["l_min_m"], ":"), (sidecar["l_max_m"], "-")):
            ax.add_patch(Circle(anchor, radius, fill=False, color=color, ls=style, lw=0.9))
        ax.plot([anchor[0]], [anchor[1]], marker="x", color=color, ms=7)
        ax.annotate(name, anchor, textcoords="offset points", xytext=(4, 4),
                    fontsize=8, color=color)

    if rows:
        xs = [r["x_m"] for r in rows]
        ys = [r["y_m"] for r in rows]
        size = 18.0 if len(rows) < 10 else 2.0
        ax.scatter(xs, ys, s=size, color="black", marker="s", label="feasible body positions")
        ax.legend(loc="lower right", fontsize=8)

    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"Reachable body workspace — {sidecar['classification']}")
    ax.autoscale_view()
    fig.savefig(out_image, metadata={"Date": None} if out_image.endswith(".svg") else None)
    plt.close(fig)

    print(f"classification={sidecar['classification']} count={sidecar['count']}")


def main(argv) -> int:
    return run_cli(render, argv, "usage: plot_workspace.py <workspace.csv> <out.svg>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
