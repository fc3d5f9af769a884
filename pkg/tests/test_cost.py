import numpy as np
import pytest

from lieddp import so3
from lieddp.cost import (
    CostSpec,
    running_cost,
    running_derivatives,
    terminal_cost,
    terminal_derivatives,
)
from lieddp.dynamics import BodyState, TangentPerturbation, retract

FD_STEP = 1e-5  # geodesic central-difference step


def random_spec(rng, sr=10.0, somega=10.0):
    return CostSpec(
        Su=0.1 * np.eye(3),
        SR=sr * np.eye(3),
        SOmega=somega * np.eye(3),
        Rd=so3.exp_so3(rng.normal(size=3)),
        Omegad=rng.normal(size=3) * 0.2,
    )


def random_state(rng):
    return BodyState(so3.exp_so3(rng.normal(size=3)), rng.normal(size=3))


def geodesic_derivative(spec, g, zeta, s=FD_STEP):
    fp = terminal_cost(spec, retract(g, TangentPerturbation.from_vector(s * zeta)))
    fm = terminal_cost(spec, retract(g, TangentPerturbation.from_vector(-s * zeta)))
    return (fp - fm) / (2 * s)


class TestSpecValidation:
    def test_su_must_be_definite(self):
        with pytest.raises(ValueError):
            CostSpec(
                Su=np.zeros((3, 3)),
                SR=np.eye(3),
                SOmega=np.eye(3),
                Rd=np.eye(3),
                Omegad=np.zeros(3),
            )

    def test_terminal_weights_may_be_zero(self):
        spec = CostSpec(
            Su=np.eye(3),
            SR=np.zeros((3, 3)),
            SOmega=np.zeros((3, 3)),
            Rd=np.eye(3),
            Omegad=np.zeros(3),
        )
        assert terminal_cost(spec, BodyState(so3.exp_so3([1.0, 0, 0]), np.ones(3))) == 0.0

    def test_asymmetric_weight_rejected(self):
        w = np.eye(3)
        w[0, 1] = 0.5
        with pytest.raises(ValueError):
            CostSpec(Su=w, SR=np.eye(3), SOmega=np.eye(3), Rd=np.eye(3), Omegad=np.zeros(3))


class TestRunningCost:
    def test_zero_control(self):
        rng = np.random.default_rng(0)
        spec = random_spec(rng)
        assert running_cost(spec, random_state(rng), np.zeros(3)) == 0.0

    def test_table1_value(self):
        spec = CostSpec(
            Su=0.1 * np.eye(3), SR=np.eye(3), SOmega=np.eye(3), Rd=np.eye(3), Omegad=np.zeros(3)
        )
        g = BodyState(np.eye(3), np.zeros(3))
        assert np.isclose(running_cost(spec, g, np.ones(3)), 0.15)

    def test_state_independent(self):
        rng = np.random.default_rng(1)
        spec = random_spec(rng)
        u = rng.normal(size=3)
        vals = {running_cost(spec, random_state(rng), u) for _ in range(5)}
        assert len(vals) == 1


class TestTerminalCost:
    def test_zero_at_target(self):
        rng = np.random.default_rng(2)
        spec = random_spec(rng)
        assert terminal_cost(spec, BodyState(spec.Rd, spec.Omegad)) <= 1e-12

    def test_half_turn_value(self):
        spec = CostSpec(
            Su=np.eye(3), SR=np.eye(3), SOmega=np.eye(3), Rd=np.eye(3), Omegad=np.zeros(3)
        )
        g = BodyState(so3.exp_so3([0.0, 0.0, np.pi]), np.zeros(3))
        assert np.isclose(terminal_cost(spec, g), 4.0)

    def test_matches_direct_trace(self):
        rng = np.random.default_rng(3)
        spec = random_spec(rng)
        g = random_state(rng)
        c = np.eye(3) - spec.Rd.T @ g.R
        w = g.Omega - spec.Omegad
        direct = 0.5 * np.trace(c.T @ spec.SR @ c) + 0.5 * w @ spec.SOmega @ w
        assert np.isclose(terminal_cost(spec, g), direct, rtol=1e-14)

    def test_positive_away_from_target(self):
        rng = np.random.default_rng(4)
        spec = random_spec(rng)
        for _ in range(20):
            g = random_state(rng)
            off_target = np.linalg.norm(g.R - spec.Rd) > 1e-6 or np.linalg.norm(
                g.Omega - spec.Omegad
            ) > 1e-6
            if off_target:
                assert terminal_cost(spec, g) > 1e-12


class TestRunningDerivatives:
    def test_zero_control(self):
        rng = np.random.default_rng(5)
        spec = random_spec(rng)
        d = running_derivatives(spec, random_state(rng), np.zeros(3))
        assert np.array_equal(d.lu, np.zeros(3))
        assert np.array_equal(d.luu, spec.Su)
        assert np.array_equal(d.lg, np.zeros(6))

    def test_lu_finite_difference(self):
        rng = np.random.default_rng(6)
        spec = random_spec(rng)
        g = random_state(rng)
        u = rng.normal(size=3)
        d = running_derivatives(spec, g, u)
        h = 1e-6
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = (running_cost(spec, g, u + e) - running_cost(spec, g, u - e)) / (2 * h)
            assert abs(fd - d.lu[j]) <= 1e-8 * max(1.0, abs(fd))

    def test_state_blocks_vanish(self):
        rng = np.random.default_rng(7)
        spec = random_spec(rng)
        for _ in range(5):
            d = running_derivatives(spec, random_state(rng), rng.normal(size=3))
            assert np.array_equal(d.lgg, np.zeros((6, 6)))
            assert np.array_equal(d.lgu, np.zeros((6, 3)))
            assert np.array_equal(d.lug, np.zeros((3, 6)))


class TestTerminalDerivatives:
    def test_at_target(self):
        spec = CostSpec(
            Su=np.eye(3),
            SR=1e4 * np.eye(3),
            SOmega=1e4 * np.eye(3),
            Rd=so3.exp_so3([0.3, -0.1, 0.2]),
            Omegad=np.zeros(3),
        )
        vg, vgg = terminal_derivatives(spec, BodyState(spec.Rd, spec.Omegad))
        assert np.linalg.norm(vg) <= 1e-10
        assert np.allclose(vgg[:3, :3], 2e4 * np.eye(3), atol=1e-9)
        assert np.allclose(vgg[3:, 3:], 1e4 * np.eye(3))

    def test_gradient_matches_geodesic_differences(self):
        rng = np.random.default_rng(8)
        spec = random_spec(rng, sr=1e4, somega=1e4)
        for _ in range(100):
            g = random_state(rng)
            vg, _ = terminal_derivatives(spec, g)
            zeta = rng.normal(size=6)
            zeta /= np.linalg.norm(zeta)
            fd = geodesic_derivative(spec, g, zeta)
            assert abs(fd - vg @ zeta) <= 1e-6 * max(abs(fd), 1e-10)

    def test_hessian_matches_second_differences_at_target(self):
        rng = np.random.default_rng(9)
        spec = random_spec(rng, sr=1e4, somega=1e4)
        g = BodyState(spec.Rd, spec.Omegad)
        _, vgg = terminal_derivatives(spec, g)
        s = 1e-4
        basis = np.eye(6)
        for a in range(6):
            for b in range(6):
                fpp = terminal_cost(spec, retract(g, TangentPerturbation.from_vector(s * (basis[a] + basis[b]))))
                fpm = terminal_cost(spec, retract(g, TangentPerturbation.from_vector(s * (basis[a] - basis[b]))))
                fmp = terminal_cost(spec, retract(g, TangentPerturbation.from_vector(-s * (basis[a] - basis[b]))))
                fmm = terminal_cost(spec, retract(g, TangentPerturbation.from_vector(-s * (basis[a] + basis[b]))))
                fd = (fpp - fpm - fmp + fmm) / (4 * s * s)
                assert abs(fd - vgg[a, b]) <= 1e-4

    def test_hessian_symmetric_everywhere(self):
        rng = np.random.default_rng(10)
        spec = random_spec(rng, sr=1e4, somega=1e4)
        for _ in range(50):
            _, vgg = terminal_derivatives(spec, random_state(rng))
            assert np.linalg.norm(vgg - vgg.T) <= 1e-12
