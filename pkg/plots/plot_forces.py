#!/usr/bin/env python3
"""Render a mission log: stacked leg/drill force traces plus the force-ratio
subplot, with phase-coloured background spans.

Usage: plot_forces.py <log.csv> <out.svg>
"""

from __future__ import annotations

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plots_common import LOG_COLUMNS, fmt9, phase_color, phase_runs, read_strict_csv, run_cli


def render(log_csv: str, out_image: str) -> None:
    rows = read_strict_csv(log_csv, LOG_COLUMNS)
    t = [r["t_s"] for r in rows]

    fig, (ax_f, ax_r) = plt.subplots(
        2, 1, sharex=True, figsize=(9.0, 6.0), height_ratios=[2.0, 1.0]
    )
    ax_f.plot(t, [r["f_left_n"] for r in rows], label="left", color="#2ca02c", lw=1.0)
    ax_f.plot(t, [r["f_center_n"] for r in rows], label="central", color="#1f1fb4", lw=1.0)
    ax_f.plot(t, [r["f_right_n"] for r in rows], label="right", color="#e377c2", lw=1.0)
    ax_f.plot(t, [r["f_drill_n"] for r in rows], label="drill", color="#17becf", lw=1.0, ls="--")
    ax_f.set_ylabel("tip force [N]")
    ax_f.legend(loc="upper left", fontsize=8)

    ax_r.plot(t, [r["ratio_left"] for r in rows], label="left", color="#2ca02c", lw=1.0)
    ax_r.plot(t, [r["ratio_center"] for r in rows], label="central", color="#1f1fb4", lw=1.0)
    ax_r.plot(t, [r["ratio_right"] for r in rows], label="right", color="#e377c2", lw=1.0)
    ax_r.set_ylim(-0.05, 1.05)
    ax_r.set_ylabel("force ratio")
    ax_r.set_xlabel("time [s]")

    runs = phase_runs(rows)
    spacing = t[1] - t[0] if len(t) > 1 else 0.0
    for i, (phase, start, end) in enumerate(runs):
        # extend each span to the start of the next run so shading is gapless
        stop = runs[i + 1][1] if i + 1 < len(runs) else end + spacing
        for ax in (ax_f, ax_r):
            ax.axvspan(start, stop, color=phase_color(phase), alpha=0.18, lw=0)
        ax_f.text(
            (start + stop) / 2.0, 0.985, phase, transform=ax_f.get_xaxis_transform(),
            ha="center", va="top", fontsize=7, rotation=90 if len(runs) > 6 else 0,
        )

    fig.suptitle("Leg and drill forces over the mission")
    fig.savefig(out_image, metadata={"Date": None} if out_image.endswith(".svg") else None)
    plt.close(fig)

    last = rows[-1]
    print(
        "final_ratios:"
        f" left={fmt9(last['ratio_left'])}"
        f" center={fmt9(last['ratio_center'])}"
        f" right={fmt9(last['ratio_right'])}"
    )


def main(argv) -> int:
    return run_cli(render, argv, "usage: plot_forces.py <log.csv> <out.svg>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
