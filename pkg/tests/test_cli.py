import json
from importlib.resources import files

import numpy as np
import pytest

from lieddp import so3
from lieddp.cli import (
    ConfigError,
    compare_schemes,
    load_config,
    main,
    matrix_of_quaternion,
    parse_rotation_sequence,
    quaternion_of,
    run,
)
from lieddp.dynamics import BodyState, rollout
from lieddp.cli import build_problem

TABLE1 = files("lieddp") / "configs" / "table1.toml"

TINY_CONFIG = """
[model]
dt = 0.01
tf = 0.5
inertia_diag = [10.0, 11.1, 13.0]

[cost]
su = 0.1
sr = 100.0
somega = 100.0

[boundary]
target_rotation = "Rot_x(20)Rot_z(35)"

[solver]
scheme = "switch"
max_iters = 60
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_CONFIG)
    return load_config(path)


class TestLoadConfig:
    def test_bundled_table1(self):
        config = load_config(TABLE1)
        assert config.horizon == 300
        assert config.dt == 0.01
        assert config.tf == 3.0
        assert config.inertia_diag == (10.0, 11.1, 13.0)
        assert np.array_equal(config.torque_axes, np.eye(3))
        assert config.su == 0.1
        assert config.sr == 1e4
        assert config.somega == 1e4
        assert np.array_equal(config.initial_omega, np.zeros(3))
        assert config.scheme == "switch"
        assert config.sigma == 0.1
        rd = parse_rotation_sequence("Rot_x(30)Rot_z(70)")
        assert np.allclose(matrix_of_quaternion(config.target_quaternion), rd, atol=1e-12)

    def test_negative_dt_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(TINY_CONFIG.replace("dt = 0.01", "dt = -0.01"))
        with pytest.raises(ConfigError, match="dt"):
            load_config(path)

    def test_non_integral_horizon_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(TINY_CONFIG.replace("tf = 0.5", "tf = 0.505"))
        with pytest.raises(ConfigError, match="tf"):
            load_config(path)

    def test_bad_quaternion_names_field(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(
            TINY_CONFIG.replace(
                'target_rotation = "Rot_x(20)Rot_z(35)"',
                "target_quaternion = [1.0, 0.2, 0.0, 0.0]",
            )
        )
        with pytest.raises(ConfigError, match="target_quaternion"):
            load_config(path)

    def test_unparseable_rotation_sequence(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(
            TINY_CONFIG.replace("Rot_x(20)Rot_z(35)", "Spin_x(20)")
        )
        with pytest.raises(ConfigError, match="target_rotation"):
            load_config(path)


class TestRotationParsing:
    def test_composes_left_to_right(self):
        r = parse_rotation_sequence("Rot_x(30)Rot_z(70)")
        rx = so3.exp_so3(np.deg2rad(30) * np.array([1.0, 0, 0]))
        rz = so3.exp_so3(np.deg2rad(70) * np.array([0.0, 0, 1]))
        assert np.allclose(r, rx @ rz, atol=1e-14)

    def test_single_factor(self):
        r = parse_rotation_sequence("Rot_y(-90)")
        assert np.allclose(r, so3.exp_so3(np.deg2rad(-90) * np.array([0.0, 1, 0])), atol=1e-14)


class TestQuaternions:
    def test_identity(self):
        assert np.allclose(quaternion_of(np.eye(3)), [1.0, 0.0, 0.0, 0.0])

    def test_quarter_turn_z(self):
        q = quaternion_of(so3.exp_so3([0, 0, np.pi / 2]))
        assert np.allclose(q, [np.sqrt(2) / 2, 0.0, 0.0, np.sqrt(2) / 2])

    def test_roundtrip_random(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            r = so3.exp_so3(rng.normal(size=3) * 2.0)
            q = quaternion_of(r)
            assert q[0] >= 0.0
            assert abs(np.linalg.norm(q) - 1.0) <= 1e-12
            assert np.linalg.norm(matrix_of_quaternion(q) - r) <= 1e-9


class TestRun:
    def test_artifacts_written_and_consistent(self, tiny_config, tmp_path):
        out = tmp_path / "out"
        artifacts = run(tiny_config, out)
        assert (out / "trajectory.csv").exists()
        assert (out / "iterations.csv").exists()
        assert (out / "summary.json").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"] is True

        # Quaternion rows are unit; logged controls re-simulate logged states.
        lines = (out / "trajectory.csv").read_text().strip().split("\n")
        header = lines[0].split(",")
        data = [line.split(",") for line in lines[1:]]
        qcols = [header.index(c) for c in ("q_w", "q_x", "q_y", "q_z")]
        ocols = [header.index(c) for c in ("Omega_1", "Omega_2", "Omega_3")]
        ucols = [header.index(c) for c in ("u_1", "u_2", "u_3")]
        quats = np.array([[float(row[c]) for c in qcols] for row in data])
        omegas = np.array([[float(row[c]) for c in ocols] for row in data])
        controls = np.array([[float(row[c]) for c in ucols] for row in data[:-1]])
        assert data[-1][ucols[0]] == ""  # no control at the final knot
        assert np.max(np.abs(np.linalg.norm(quats, axis=1) - 1.0)) <= 1e-9

        model, _, _ = build_problem(tiny_config)
        g0 = BodyState(matrix_of_quaternion(quats[0]), omegas[0])
        states = rollout(model, g0, controls)
        for g, q, om in zip(states, quats, omegas):
            assert np.linalg.norm(g.R - matrix_of_quaternion(q)) <= 1e-9
            assert np.linalg.norm(g.Omega - om) <= 1e-9

    def test_deterministic_bytes(self, tiny_config, tmp_path):
        run(tiny_config, tmp_path / "a")
        run(tiny_config, tmp_path / "b")
        for name in ("trajectory.csv", "iterations.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_zero_terminal_weight_single_iteration(self, tmp_path):
        path = tmp_path / "zero.toml"
        path.write_text(TINY_CONFIG.replace("sr = 100.0", "sr = 0.0").replace("somega = 100.0", "somega = 0.0"))
        config = load_config(path)
        artifacts = run(config, tmp_path / "out")
        assert artifacts.summary["converged"] is True
        assert artifacts.summary["iterations"] == 1
        assert artifacts.summary["final_cost"] == 0.0

    def test_iteration_table_monotone(self, tiny_config, tmp_path):
        artifacts = run(tiny_config, tmp_path / "out")
        costs = [row[1] for row in artifacts.iteration_rows]
        assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))


class TestCompare:
    def test_three_schemes_agree(self, tiny_config, tmp_path):
        overview = compare_schemes(tiny_config, tmp_path / "cmp")
        finals = [overview[s]["final_cost"] for s in ("first", "second", "switch")]
        assert max(finals) - min(finals) <= 1e-6 * max(abs(f) for f in finals)
        table = (tmp_path / "cmp" / "comparison.csv").read_text().strip().split("\n")
        assert table[0] == "iter,J_first,dist_first,J_second,dist_second,J_switch,dist_switch"
        assert len(table) >= 3
        for scheme in ("first", "second", "switch"):
            assert (tmp_path / "cmp" / scheme / "trajectory.csv").exists()


class TestMain:
    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("[model]\ndt = -1.0\ntf = 1.0\ninertia_diag = [1.0, 1.0, 1.0]\n[cost]\nsu = 1.0\nsr = 1.0\nsomega = 1.0\n")
        code = main(["--config", str(bad), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "dt" in capsys.readouterr().err

    def test_successful_run_exit_code(self, tmp_path):
        path = tmp_path / "tiny.toml"
        path.write_text(TINY_CONFIG)
        code = main(["--config", str(path), "--out", str(tmp_path / "out"), "--scheme", "second"])
        assert code == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["scheme"] == "second"

    def test_flag_overrides(self, tmp_path):
        path = tmp_path / "tiny.toml"
        path.write_text(TINY_CONFIG)
        code = main(
            [
                "--config",
                str(path),
                "--out",
                str(tmp_path / "out"),
                "--max-iters",
                "1",
                "--tol",
                "1e-14",
            ]
        )
        assert code == 2  # one iteration cannot reach 1e-14
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["converged"] is False
        assert summary["iterations"] == 1
