#!/usr/bin/env python3
"""Render a rotary step response: commanded, true, and encoder traces with a
rise-time marker.

Usage: plot_step.py <step.csv> <out.svg>
"""

from __future__ import annotations

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plots_common import STEP_COLUMNS, SchemaError, fmt9, read_strict_csv, run_cli

RISE_BAND = 0.02  # rad; matches the simulator's rise-time rule


def render(step_csv: str, out_image: str) -> None:
    rows = read_strict_csv(step_csv, STEP_COLUMNS, text_columns=())
    targets = {r["commanded_rad"] for r in rows}
    if len(targets) != 1:
        raise SchemaError(f"{step_csv}: commanded_rad must be a constant step input")
    target = rows[0]["commanded_rad"]

    t = [r["t_s"] for r in rows]
    true = [r["true_rad"] for r in rows]
    enc = [r["encoder_rad"] for r in rows]

    rise_time = None
    for r in rows:
        if abs(r["true_rad"] - target) <= RISE_BAND:
            rise_time = r["t_s"]
            break
    max_err = max(abs(e - v) for e, v in zip(enc, true))

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(t, [target] * len(t), color="#9e9e9e", ls="--", lw=1.0, label="commanded")
    ax.plot(t, true, color="#1f77b4", lw=1.2, label="true")
    ax.step(t, enc, color="#d62728", lw=0.8, where="post", label="encoder")
    # mark the rise only when the joint actually had to move
    if rise_time is not None and abs(true[0] - target) > RISE_BAND:
        ax.axvline(rise_time, color="#2ca02c", ls=":", lw=1.0)
        ax.annotate(f"rise {fmt9(rise_time)} s", (rise_time, target),
                    textcoords="offset points", xytext=(6, -14), fontsize=8, color="#2ca02c")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("angle [rad]")
    ax.set_title("Rotary joint step response")
    ax.legend(loc="lower right", fontsize=8)
    fig.savefig(out_image, metadata={"Date": None} if out_image.endswith(".svg") else None)
    plt.close(fig)

    rise_text = fmt9(rise_time) if rise_time is not None else "none"
    print(f"rise_time_s={rise_text} max_encoder_error_rad={fmt9(max_err)}")


def main(argv) -> int:
    return run_cli(render, argv, "usage: plot_step.py <step.csv> <out.svg>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
