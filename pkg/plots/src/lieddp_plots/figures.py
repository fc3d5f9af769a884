"""Figure rendering over the benchmark CSV/JSON artifacts.

Pure file-to-file transformation: everything plotted is read from
``trajectory.csv``, ``iterations.csv``, ``comparison.csv`` and
``summary.json`` as documented by the solver CLI; nothing is recomputed and
no solver code is imported.
"""

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_SETS = ("trajectory", "convergence", "compare")


class SchemaError(ValueError):
    """Input artifact does not match the documented schema."""


@dataclass
class PlotJob:
    """One batch of figures: where to read artifacts and write images."""

    input_dir: Path
    output_dir: Path
    figures: tuple = FIGURE_SETS

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output_dir = Path(self.output_dir)
        unknown = set(self.figures) - set(FIGURE_SETS)
        if unknown:
            raise ValueError(f"unknown figure selectors: {sorted(unknown)}")


def read_table(path: Path, required: tuple = ()) -> dict:
    """Columns of a CSV file as float arrays (empty cells become NaN)."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        names = reader.fieldnames or []
        missing = [c for c in required if c not in names]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}; found {names}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = {}
    for name in names:
        cells = [row[name] for row in rows]
        try:
            table[name] = np.array(
                [float(c) if c not in ("", None) else np.nan for c in cells]
            )
        except ValueError:
            table[name] = np.array(cells, dtype=object)
    return table


def read_summary(path: Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    return json.loads(path.read_text())


def _save(fig, output_dir: Path, stem: str) -> list:
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in ("png", "svg"):
        target = output_dir / f"{stem}.{ext}"
        fig.savefig(target, dpi=150)
        written.append(target)
    plt.close(fig)
    return written


def trajectory_figure(table: dict, summary: dict):
    """Three stacked panels: attitude quaternion, body rates, torques."""
    t = table["t"]
    tf = summary.get("tf", t[-1])
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.0), sharex=True)

    for i, name in enumerate(("q_w", "q_x", "q_y", "q_z")):
        axes[0].plot(t, table[name], label=name)
    target_q = summary.get("target_quaternion")
    if target_q is not None:
        axes[0].scatter([tf] * 4, target_q, marker="o", facecolors="none",
                        edgecolors="k", zorder=3, label="target")
    axes[0].set_ylabel("attitude quaternion")
    axes[0].legend(loc="best", fontsize=8, ncol=2)

    for i, name in enumerate(("Omega_1", "Omega_2", "Omega_3")):
        axes[1].plot(t, table[name], label=name)
    target_omega = summary.get("target_omega")
    if target_omega is not None:
        axes[1].scatter([tf] * 3, target_omega, marker="o", facecolors="none",
                        edgecolors="k", zorder=3, label="target")
    axes[1].set_ylabel("body rate [rad/s]")
    axes[1].legend(loc="best", fontsize=8)

    u_names = sorted((n for n in table if n.startswith("u_")), key=lambda n: int(n[2:]))
    for name in u_names:
        mask = ~np.isnan(table[name])
        axes[2].plot(t[mask], table[name][mask], label=name)
    axes[2].set_ylabel("torque [N m]")
    axes[2].set_xlabel("time [s]")
    axes[2].legend(loc="best", fontsize=8)

    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def convergence_figure(table: dict):
    """Cost per iteration on a log scale, plus distance-to-solution if logged."""
    it = table["iter"]
    have_dist = "dist_to_final" in table and np.any(np.nan_to_num(table["dist_to_final"]) > 0)
    if "dist_to_final" not in table:
        warnings.warn("iterations table has no dist_to_final column; cost-only figure")
    panels = 2 if have_dist else 1
    fig, axes = plt.subplots(1, panels, figsize=(4.5 * panels, 3.6), squeeze=False)
    axes = axes[0]
    axes[0].semilogy(it, table["J"], marker="o")
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("total cost")
    if have_dist:
        axes[1].semilogy(it, table["dist_to_final"], marker="o")
        axes[1].set_xlabel("iteration")
        axes[1].set_ylabel("distance to final controls")
    for ax in axes:
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return fig


def compare_figure(table: dict, schemes: tuple = ("first", "second", "switch")):
    """Per-scheme cost and error curves on log scales."""
    it = table["iter"]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for scheme in schemes:
        mask = ~np.isnan(table[f"J_{scheme}"])
        axes[0].semilogy(it[mask], table[f"J_{scheme}"][mask], marker="o", label=scheme)
        dist = table[f"dist_{scheme}"]
        mask = ~np.isnan(dist) & (dist > 0)
        axes[1].semilogy(it[mask], dist[mask], marker="o", label=scheme)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("total cost")
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("distance to own solution")
    for ax in axes:
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def plot_trajectory(job: PlotJob) -> list:
    """Render the Fig.-2-style state/control panels; returns written paths."""
    table = read_table(
        job.input_dir / "trajectory.csv",
        required=("k", "t", "q_w", "q_x", "q_y", "q_z", "Omega_1", "Omega_2", "Omega_3"),
    )
    summary = read_summary(job.input_dir / "summary.json")
    fig = trajectory_figure(table, summary)
    return _save(fig, job.output_dir, "trajectory")


def plot_convergence(job: PlotJob) -> list:
    """Render convergence curves; in compare mode one line per scheme."""
    written = []
    if "convergence" in job.figures:
        table = read_table(job.input_dir / "iterations.csv", required=("iter", "J"))
        written += _save(convergence_figure(table), job.output_dir, "convergence")
    if "compare" in job.figures:
        required = ["iter"]
        for scheme in ("first", "second", "switch"):
            required += [f"J_{scheme}", f"dist_{scheme}"]
        table = read_table(job.input_dir / "comparison.csv", required=tuple(required))
        written += _save(compare_figure(table), job.output_dir, "compare")
    return written


def run_job(job: PlotJob) -> list:
    written = []
    if "trajectory" in job.figures:
        written += plot_trajectory(job)
    if "convergence" in job.figures or "compare" in job.figures:
        written += plot_convergence(job)
    return written
