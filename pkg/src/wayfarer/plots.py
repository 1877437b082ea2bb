"""Static figure rendering for evaluation reports and training curves.

Figures are written next to the CSV outputs: one top-down map per test
case showing the perimeter, the goal acceptance boxes, and every trial
path, plus a learning-curve sheet derived from the metrics history.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from .env import EpisodeConfig
from .evaluate import SuccessReport


def _draw_arena(ax: plt.Axes, episode: EpisodeConfig) -> None:
    lo = episode.perimeter.low
    side = 2 * episode.perimeter.half_extent
    ax.add_patch(
        Rectangle(lo, side, side, fill=False, edgecolor="tab:gray", linestyle="--", linewidth=1.0)
    )
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def _draw_goals(ax: plt.Axes, waypoints, boundary: tuple[float, float]) -> None:
    bx, by = boundary
    for i, (gx, gy) in enumerate(waypoints):
        ax.add_patch(
            Rectangle(
                (gx - bx, gy - by), 2 * bx, 2 * by,
                fill=False, edgecolor="tab:red", linewidth=1.0, alpha=0.8,
            )
        )
        ax.plot([gx], [gy], marker="x", color="tab:red")
        ax.annotate(str(i + 1), (gx, gy), textcoords="offset points", xytext=(5, 5), fontsize=8)


def plot_case(report: SuccessReport, episode: EpisodeConfig, destination: str | Path) -> Path:
    """Top-down map of every trial path for one test case."""
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    _draw_arena(ax, episode)
    _draw_goals(ax, report.case.waypoints, episode.boundary)
    for result in report.results:
        xy = np.array([(row[1], row[2]) for row in result.trajectory])
        color = "tab:green" if result.success else "tab:orange"
        ax.plot(xy[:, 0], xy[:, 1], color=color, alpha=0.6, linewidth=0.9)
    ax.plot([0.0], [0.0], marker="o", color="black", markersize=4)
    ax.annotate("start", (0, 0), textcoords="offset points", xytext=(5, 5), fontsize=8)
    ax.set_title(f"{report.case.name}: {report.successes}/{report.trials} successful")
    ax.relim()
    ax.autoscale_view()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_suite(
    reports: list[SuccessReport], episode: EpisodeConfig, out_dir: str | Path
) -> list[Path]:
    out = Path(out_dir)
    return [plot_case(r, episode, out / f"{r.case.name}.png") for r in reports]


def plot_training_curves(metrics_csv: str | Path, destination: str | Path) -> Path:
    """Return/episode-length/waypoint/loss curves from the metrics history."""
    rows = []
    with Path(metrics_csv).open(newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            rows.append({k: float(v) for k, v in row.items()})
    if not rows:
        raise ValueError(f"no metric rows in {metrics_csv}")

    it = [r["iteration"] for r in rows]
    panels = [
        ("mean_return", "mean return"),
        ("mean_waypoints", "waypoints reached"),
        ("mean_episode_len", "episode length [steps]"),
        ("entropy", "policy entropy"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    for ax, (key, label) in zip(axes.flat, panels):
        ax.plot(it, [r[key] for r in rows], linewidth=0.9)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("iteration")
    fig.tight_layout()
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
