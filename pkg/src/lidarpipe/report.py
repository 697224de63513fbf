"""Run reports: delimited per-frame/per-function tables plus figures.

Written next to (not inside) the export tree so exported datasets stay
byte-reproducible across runs while timing data does not.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import RunStats


def write_report(stats: RunStats, report_dir: Path | str) -> list[Path]:
    """summary.csv, timings.csv, and the two overview figures."""
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    summary = out / "summary.csv"
    with summary.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["frame", "stem", "points_in", "points_out", "labels", "errors", "warnings", "seconds"]
        )
        for f in stats.frames:
            writer.writerow(
                [f.index, f.stem, f.points_in, f.points_out, f.labels,
                 f.errors, f.warnings, f"{f.seconds:.6f}"]
            )
    written.append(summary)

    timings = out / "timings.csv"
    with timings.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["function", "calls", "total_s", "mean_ms"])
        for key in sorted(stats.fn_seconds):
            calls = stats.fn_calls.get(key, 0)
            total = stats.fn_seconds[key]
            mean_ms = 1000.0 * total / calls if calls else 0.0
            writer.writerow([key, calls, f"{total:.6f}", f"{mean_ms:.3f}"])
    written.append(timings)

    written.append(_figure_timings(stats, out / "timings.png"))
    written.append(_figure_frames(stats, out / "frames.png"))
    return written


def _figure_timings(stats: RunStats, path: Path) -> Path:
    keys = sorted(stats.fn_seconds, key=lambda k: stats.fn_seconds[k])
    means = [
        1000.0 * stats.fn_seconds[k] / max(stats.fn_calls.get(k, 1), 1) for k in keys
    ]
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.4 * len(keys) + 1)))
    if keys:
        ax.barh(keys, means, color="#4878cf")
    ax.set_xlabel("mean time per frame (ms)")
    ax.set_title("Per-function timings")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def _figure_frames(stats: RunStats, path: Path) -> Path:
    idx = [f.index for f in stats.frames]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(idx, [f.points_in for f in stats.frames], label="points in", color="#4878cf")
    ax1.plot(idx, [f.points_out for f in stats.frames], label="points out", color="#d65f5f")
    ax1.set_ylabel("points")
    ax1.legend(loc="best")
    ax1.set_title("Frame statistics")
    ax2.plot(idx, [f.labels for f in stats.frames], label="labels", color="#6acc65")
    ax2.set_ylabel("labels")
    ax2.set_xlabel("frame")
    ax2.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
