"""Offline figure generation for the attitude-benchmark artifacts."""

from .figures import (
    FIGURE_SETS,
    PlotJob,
    SchemaError,
    compare_figure,
    convergence_figure,
    plot_convergence,
    plot_trajectory,
    read_summary,
    read_table,
    run_job,
    trajectory_figure,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_SETS",
    "PlotJob",
    "SchemaError",
    "compare_figure",
    "convergence_figure",
    "plot_convergence",
    "plot_trajectory",
    "read_summary",
    "read_table",
    "run_job",
    "trajectory_figure",
]
