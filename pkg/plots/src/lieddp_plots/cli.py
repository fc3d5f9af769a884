"""Batch renderer: ``lieddp-plots INPUT_DIR OUTPUT_DIR [--figures ...]``."""

import argparse
import sys

from .figures import FIGURE_SETS, PlotJob, SchemaError, run_job


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lieddp-plots",
        description="Render PNG/SVG figures from benchmark CSV/JSON artifacts.",
    )
    parser.add_argument("input_dir", help="directory holding the solver artifacts")
    parser.add_argument("output_dir", help="directory for the rendered images")
    parser.add_argument(
        "--figures",
        nargs="+",
        choices=FIGURE_SETS,
        default=["trajectory", "convergence"],
        help="figure sets to render",
    )
    args = parser.parse_args(argv)

    job = PlotJob(args.input_dir, args.output_dir, tuple(args.figures))
    try:
        written = run_job(job)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
