"""Benchmark driver: load a TOML problem description, run the solver, and
write machine-readable artifacts.

Outputs in the chosen directory:
    trajectory.csv   per-step time, attitude quaternion, body rates, torques
    iterations.csv   per-iteration solver diagnostics
    summary.json     scalar results and run metadata
    comparison.csv   (``--compare`` only) aligned per-scheme cost/error series

Exit codes: 0 on convergence, 2 on non-convergence, 1 on a configuration
error.  Floats are written with 17 significant digits so the CSV bodies are
byte-stable and round-trip exactly.
"""

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import so3
from .cost import CostSpec
from .dynamics import BodyState, SatelliteModel, rollout
from .solver import SCHEMES, SolveResult, SolverConfig, solve, total_cost


class ConfigError(ValueError):
    """Configuration file problem; the message names the offending field."""


@dataclass(frozen=True)
class BenchmarkConfig:
    """Validated benchmark description."""

    dt: float
    tf: float
    inertia_diag: tuple
    torque_axes: np.ndarray
    su: float
    sr: float
    somega: float
    initial_quaternion: np.ndarray
    initial_omega: np.ndarray
    target_quaternion: np.ndarray
    target_omega: np.ndarray
    scheme: str = "switch"
    sigma: float = 0.1
    tol: float = 1e-8
    max_iters: int = 100
    seed: int = 0

    @property
    def horizon(self) -> int:
        return int(round(self.tf / self.dt))

    @property
    def num_controls(self) -> int:
        return self.torque_axes.shape[1]


@dataclass
class RunArtifacts:
    """In-memory copies of the files written by :func:`run`."""

    trajectory_table: np.ndarray
    iteration_rows: list
    summary: dict
    output_dir: Path


_ROT_TOKEN = re.compile(r"Rot_([xyz])\(\s*([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)\s*\)")
_AXES = {"x": np.array([1.0, 0.0, 0.0]), "y": np.array([0.0, 1.0, 0.0]), "z": np.array([0.0, 0.0, 1.0])}


def parse_rotation_sequence(text: str) -> np.ndarray:
    """Compose intrinsic axis rotations written like ``Rot_x(30)Rot_z(70)``.

    Angles are degrees; factors compose left to right as written.
    """
    stripped = text.replace(" ", "")
    matched = "".join(m.group(0) for m in _ROT_TOKEN.finditer(stripped))
    if not stripped or matched != stripped:
        raise ConfigError(f"target_rotation: cannot parse {text!r}")
    r = np.eye(3)
    for axis, angle in _ROT_TOKEN.findall(stripped):
        r = r @ so3.exp_so3(np.deg2rad(float(angle)) * _AXES[axis])
    return r


def quaternion_of(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a rotation matrix, with w >= 0."""
    r = so3.check_rotation(r)
    t = np.trace(r)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] >= r[1, 1] and r[0, 0] >= r[2, 2]:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] >= r[2, 2]:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s])
    q = q / np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return q


def matrix_of_quaternion(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _get(section: dict, section_name: str, key: str, default=None):
    if key in section:
        return section[key]
    if default is not None:
        return default
    raise ConfigError(f"{section_name}.{key}: missing required field")


def _vector(value, name: str, length: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (length,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name}: expected {length} finite numbers")
    return arr


def _unit_quaternion(value, name: str) -> np.ndarray:
    q = _vector(value, name, 4)
    if abs(np.linalg.norm(q) - 1.0) > 1e-9:
        raise ConfigError(f"{name}: quaternion must have unit norm (within 1e-9)")
    return q / np.linalg.norm(q)


def load_config(path) -> BenchmarkConfig:
    """Parse and validate a benchmark TOML file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None

    model = raw.get("model", {})
    cost_sec = raw.get("cost", {})
    boundary = raw.get("boundary", {})
    solver_sec = raw.get("solver", {})

    dt = float(_get(model, "model", "dt"))
    tf = float(_get(model, "model", "tf"))
    if dt <= 0.0 or dt > 0.1:
        raise ConfigError("model.dt: must lie in (0, 0.1]")
    if tf <= 0.0:
        raise ConfigError("model.tf: must be positive")
    steps = tf / dt
    if abs(steps - round(steps)) > 1e-9:
        raise ConfigError("model.tf: tf/dt must be an integer number of steps")

    inertia_diag = _vector(_get(model, "model", "inertia_diag"), "model.inertia_diag", 3)
    if np.min(inertia_diag) <= 0.0:
        raise ConfigError("model.inertia_diag: entries must be positive")
    axes_raw = _get(model, "model", "torque_axes", default=[[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])
    axes = np.asarray(axes_raw, dtype=float)
    if axes.ndim != 2 or axes.shape[1] != 3 or axes.shape[0] < 1:
        raise ConfigError("model.torque_axes: expected a list of 3-vectors")

    su = float(_get(cost_sec, "cost", "su"))
    sr = float(_get(cost_sec, "cost", "sr"))
    somega = float(_get(cost_sec, "cost", "somega"))
    if su <= 0.0:
        raise ConfigError("cost.su: must be positive")
    if sr < 0.0 or somega < 0.0:
        raise ConfigError("cost.sr / cost.somega: must be nonnegative")

    initial_q = _unit_quaternion(
        _get(boundary, "boundary", "initial_quaternion", default=[1.0, 0.0, 0.0, 0.0]),
        "boundary.initial_quaternion",
    )
    initial_omega = _vector(
        _get(boundary, "boundary", "initial_omega", default=[0.0, 0.0, 0.0]),
        "boundary.initial_omega",
        3,
    )
    if "target_quaternion" in boundary and "target_rotation" in boundary:
        raise ConfigError("boundary: give either target_quaternion or target_rotation, not both")
    if "target_rotation" in boundary:
        target_q = quaternion_of(parse_rotation_sequence(boundary["target_rotation"]))
    else:
        target_q = _unit_quaternion(
            _get(boundary, "boundary", "target_quaternion"), "boundary.target_quaternion"
        )
    target_omega = _vector(
        _get(boundary, "boundary", "target_omega", default=[0.0, 0.0, 0.0]),
        "boundary.target_omega",
        3,
    )

    scheme = _get(solver_sec, "solver", "scheme", default="switch")
    if scheme not in SCHEMES:
        raise ConfigError(f"solver.scheme: must be one of {SCHEMES}")
    sigma = float(_get(solver_sec, "solver", "sigma", default=0.1))
    tol = float(_get(solver_sec, "solver", "tol", default=1e-8))
    max_iters = int(_get(solver_sec, "solver", "max_iters", default=100))
    seed = int(_get(solver_sec, "solver", "seed", default=0))
    if not (0.0 < sigma < 1.0):
        raise ConfigError("solver.sigma: must lie in (0, 1)")
    if tol <= 0.0 or max_iters < 1:
        raise ConfigError("solver.tol / solver.max_iters: must be positive")

    return BenchmarkConfig(
        dt=dt,
        tf=tf,
        inertia_diag=tuple(float(x) for x in inertia_diag),
        torque_axes=axes.T.copy(),
        su=su,
        sr=sr,
        somega=somega,
        initial_quaternion=initial_q,
        initial_omega=initial_omega,
        target_quaternion=target_q,
        target_omega=target_omega,
        scheme=scheme,
        sigma=sigma,
        tol=tol,
        max_iters=max_iters,
        seed=seed,
    )


def build_problem(config: BenchmarkConfig):
    """Instantiate the model, cost and initial state described by a config."""
    model = SatelliteModel(
        dt=config.dt,
        inertia=np.diag(config.inertia_diag),
        torque_axes=config.torque_axes,
        horizon=config.horizon,
    )
    m = config.num_controls
    spec = CostSpec(
        Su=config.su * np.eye(m),
        SR=config.sr * np.eye(3),
        SOmega=config.somega * np.eye(3),
        Rd=matrix_of_quaternion(config.target_quaternion),
        Omegad=config.target_omega,
    )
    g0 = BodyState(matrix_of_quaternion(config.initial_quaternion), config.initial_omega)
    return model, spec, g0


def _solver_config(config: BenchmarkConfig, scheme: str | None = None) -> SolverConfig:
    return SolverConfig(
        tol=config.tol,
        max_iters=config.max_iters,
        sigma=config.sigma,
        scheme=scheme or config.scheme,
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if cell is None else (cell if isinstance(cell, str) else _fmt(cell)) for cell in row))
    path.write_text("\n".join(lines) + "\n")


def _trajectory_rows(config: BenchmarkConfig, result: SolveResult) -> tuple[list, list]:
    m = config.num_controls
    header = ["k", "t", "q_w", "q_x", "q_y", "q_z", "Omega_1", "Omega_2", "Omega_3"]
    header += [f"u_{i + 1}" for i in range(m)]
    rows = []
    for k, g in enumerate(result.trajectory):
        q = quaternion_of(g.R)
        row = [float(k), k * config.dt, *q, *g.Omega]
        if k < len(result.controls):
            row += list(result.controls[k])
        else:
            row += [None] * m
        rows.append(row)
    return header, rows


def _iteration_rows(result: SolveResult, initial_cost: float, initial_scheme: str) -> tuple[list, list]:
    header = ["iter", "J", "predicted_decrease", "gamma", "lambda", "scheme", "max_Qu_norm", "dist_to_final"]
    final_controls = result.controls
    dists = [float(np.linalg.norm(u - final_controls)) for u in result.controls_history]
    rows = [[0.0, initial_cost, None, None, None, initial_scheme, None, dists[0]]]
    for rec, dist in zip(result.records, dists[1:]):
        rows.append(
            [
                float(rec.iteration),
                rec.J,
                rec.predicted_decrease,
                rec.gamma_used,
                rec.lambda_used,
                rec.scheme_active,
                rec.max_Qu_norm,
                dist,
            ]
        )
    return header, rows


def run(config: BenchmarkConfig, output_dir) -> RunArtifacts:
    """Solve the benchmark and write trajectory/iteration/summary artifacts."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    model, spec, g0 = build_problem(config)

    initial_controls = np.zeros((config.horizon, config.num_controls))
    initial_traj = rollout(model, g0, initial_controls)
    initial_cost = total_cost(spec, initial_traj, initial_controls)
    result = solve(model, spec, _solver_config(config), g0, initial_controls)

    header, rows = _trajectory_rows(config, result)
    _write_csv(output_dir / "trajectory.csv", header, rows)
    it_header, it_rows = _iteration_rows(result, initial_cost, "first" if config.scheme != "second" else "second")
    _write_csv(output_dir / "iterations.csv", it_header, it_rows)

    g_final = result.trajectory[-1]
    rd = matrix_of_quaternion(config.target_quaternion)
    attitude_err = float(np.linalg.norm(so3.log_so3(so3.project_rotation(rd.T @ g_final.R))))
    rate_err = float(np.linalg.norm(g_final.Omega - config.target_omega))
    summary = {
        "converged": result.converged,
        "iterations": len(result.records),
        "final_cost": result.final_cost,
        "initial_cost": initial_cost,
        "terminal_attitude_error_rad": attitude_err,
        "terminal_rate_error_rad_s": rate_err,
        "final_max_Qu_norm": result.final_max_Qu_norm,
        "scheme": config.scheme,
        "switch_iteration": result.switch_iteration,
        "dt": config.dt,
        "tf": config.tf,
        "seed": config.seed,
        "target_quaternion": [float(x) for x in config.target_quaternion],
        "target_omega": [float(x) for x in config.target_omega],
    }
    (output_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    table = np.array([[np.nan if c is None else c for c in row] for row in rows])
    return RunArtifacts(table, it_rows, summary, output_dir)


def compare_schemes(config: BenchmarkConfig, output_dir) -> dict:
    """Run all three linearization schemes and write aligned convergence series.

    Each scheme's full artifacts land in a subdirectory; ``comparison.csv``
    holds per-iteration cost and distance-to-own-solution columns, padded
    where a scheme finished early.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    series = {}
    summaries = {}
    for scheme in SCHEMES:
        sub = dict(config.__dict__)
        sub["scheme"] = scheme
        sub_config = BenchmarkConfig(**sub)
        artifacts = run(sub_config, output_dir / scheme)
        j_col = [row[1] for row in artifacts.iteration_rows]
        d_col = [row[7] for row in artifacts.iteration_rows]
        series[scheme] = (j_col, d_col)
        summaries[scheme] = artifacts.summary

    longest = max(len(j) for j, _ in series.values())
    header = ["iter"]
    for scheme in SCHEMES:
        header += [f"J_{scheme}", f"dist_{scheme}"]
    rows = []
    for i in range(longest):
        row = [float(i)]
        for scheme in SCHEMES:
            j_col, d_col = series[scheme]
            row += [j_col[i] if i < len(j_col) else None, d_col[i] if i < len(d_col) else None]
        rows.append(row)
    _write_csv(output_dir / "comparison.csv", header, rows)

    overview = {scheme: summaries[scheme] for scheme in SCHEMES}
    (output_dir / "compare_summary.json").write_text(json.dumps(overview, indent=2) + "\n")
    return overview


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lieddp-bench",
        description="Run the rigid-body attitude benchmark and write CSV/JSON artifacts.",
    )
    parser.add_argument("--config", required=True, help="benchmark TOML file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--scheme", choices=SCHEMES, help="override the linearization scheme")
    parser.add_argument("--sigma", type=float, help="override the switch threshold")
    parser.add_argument("--tol", type=float, help="override the convergence tolerance")
    parser.add_argument("--max-iters", type=int, help="override the iteration cap")
    parser.add_argument("--compare", action="store_true", help="run all three schemes and align their series")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        overrides = {}
        if args.scheme is not None:
            overrides["scheme"] = args.scheme
        if args.sigma is not None:
            overrides["sigma"] = args.sigma
        if args.tol is not None:
            overrides["tol"] = args.tol
        if args.max_iters is not None:
            overrides["max_iters"] = args.max_iters
        if overrides:
            merged = dict(config.__dict__)
            merged.update(overrides)
            config = BenchmarkConfig(**merged)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.compare:
        overview = compare_schemes(config, args.out)
        return 0 if all(s["converged"] for s in overview.values()) else 2
    artifacts = run(config, args.out)
    return 0 if artifacts.summary["converged"] else 2


if __name__ == "__main__":
    sys.exit(main())
