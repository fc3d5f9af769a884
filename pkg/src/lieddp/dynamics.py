"""Discrete rigid-body dynamics on SO(3) x R^3 and per-step linearization.

The state couples a rotation matrix with a body-fixed angular velocity.  The
transition is a forward-Euler update: the pose advances along the group
exponential of the current velocity and the velocity integrates the Euler
rigid-body equation.  ``linearize_step`` expands the propagation of tangent
perturbations (eta, dxi) through one step to second order; the quadratic
terms in the pose block come from a truncated composition of exponentials.
"""

from dataclasses import dataclass, field

import numpy as np

from . import so3


@dataclass
class BodyState:
    """Pose and body-fixed angular velocity (rad/s)."""

    R: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        self.R = so3.check_rotation(self.R)
        self.Omega = np.asarray(self.Omega, dtype=float)
        if self.Omega.shape != (3,) or not np.all(np.isfinite(self.Omega)):
            raise ValueError("Omega must be a finite length-3 vector")


@dataclass
class TangentPerturbation:
    """Pose perturbation in exponential coordinates stacked with a velocity one."""

    eta: np.ndarray
    dxi: np.ndarray

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.dxi = np.asarray(self.dxi, dtype=float)

    @property
    def vector(self) -> np.ndarray:
        """Stacked (eta, dxi) as a length-6 array."""
        return np.concatenate([self.eta, self.dxi])

    @classmethod
    def from_vector(cls, zeta: np.ndarray) -> "TangentPerturbation":
        zeta = np.asarray(zeta, dtype=float)
        return cls(zeta[:3], zeta[3:])


@dataclass(frozen=True)
class SatelliteModel:
    """Torque-controlled rigid body integrated with a fixed step.

    Attributes:
        dt: time step in seconds, restricted to (0, 0.1].
        inertia: 3x3 symmetric positive-definite inertia tensor (kg m^2).
        torque_axes: 3xm matrix whose columns are the torque directions.
        horizon: number of steps in the benchmark horizon.
    """

    dt: float
    inertia: np.ndarray
    torque_axes: np.ndarray
    horizon: int
    inertia_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        object.__setattr__(self, "torque_axes", np.asarray(self.torque_axes, dtype=float))
        if not (0.0 < self.dt <= 0.1):
            raise ValueError("dt must lie in (0, 0.1]")
        if self.inertia.shape != (3, 3) or np.linalg.norm(self.inertia - self.inertia.T) > 1e-9:
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.min(np.linalg.eigvalsh(self.inertia)) <= 0.0:
            raise ValueError("inertia must be positive definite")
        if self.torque_axes.ndim != 2 or self.torque_axes.shape[0] != 3:
            raise ValueError("torque_axes must be a 3xm matrix")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        object.__setattr__(self, "inertia_inv", np.linalg.inv(self.inertia))

    @property
    def num_controls(self) -> int:
        return self.torque_axes.shape[1]


@dataclass
class LinearizedStep:
    """Operators of the second-order tangent propagation through one step.

    ``Phi`` (6x6) and ``B`` (6xm) are the linear maps; ``Theta`` (6x6x6),
    ``Gamma`` (6x6xm), ``Delta`` (6xmx6) and ``Xi`` (6xmxm) hold the six
    component matrices of the quadratic forms, indexed by output component.
    For this model the control enters affinely, so Gamma, Delta and Xi are
    identically zero; the slots exist for dynamics where they are not.
    """

    Phi: np.ndarray
    B: np.ndarray
    Theta: np.ndarray
    Gamma: np.ndarray
    Delta: np.ndarray
    Xi: np.ndarray


def step(model: SatelliteModel, g: BodyState, u: np.ndarray) -> BodyState:
    """Advance one forward-Euler step under control torque ``u``."""
    u = np.asarray(u, dtype=float)
    r_next = so3.project_rotation(g.R @ so3.exp_so3(model.dt * g.Omega))
    body_momentum = model.inertia @ g.Omega
    omega_next = g.Omega + model.dt * (
        model.inertia_inv @ (np.cross(body_momentum, g.Omega) + model.torque_axes @ u)
    )
    return BodyState(r_next, omega_next)


def rollout(model: SatelliteModel, g0: BodyState, controls: np.ndarray) -> list[BodyState]:
    """States visited from ``g0`` under an HxM control sequence (H+1 entries)."""
    controls = np.asarray(controls, dtype=float)
    states = [g0]
    for u in controls:
        states.append(step(model, states[-1], u))
    return states


def retract(g: BodyState, zeta: TangentPerturbation) -> BodyState:
    """State reached from ``g`` along the tangent perturbation ``zeta``."""
    return BodyState(
        so3.project_rotation(g.R @ so3.exp_so3(zeta.eta)),
        g.Omega + zeta.dxi,
    )


def perturbation_between(nominal: BodyState, actual: BodyState) -> TangentPerturbation:
    """Tangent coordinates of ``actual`` relative to ``nominal``.

    Raises ValueError when the rotations are separated by a geodesic angle of
    pi - 1e-3 or more, where exponential coordinates degenerate.
    """
    eta = so3.log_so3(so3.project_rotation(nominal.R.T @ actual.R))
    if np.linalg.norm(eta) >= np.pi - 1e-3:
        raise ValueError("states too far apart for exponential coordinates")
    return TangentPerturbation(eta, actual.Omega - nominal.Omega)


def linearize_kinematics(model: SatelliteModel, xi_bar: np.ndarray):
    """Pose-block operators of the tangent propagation at velocity ``xi_bar``.

    Returns:
        phi_xx: 3x3 linear map on eta.
        phi_xxi: 3x3 linear map on dxi.
        omega_quad: (3, 3, 3) array, ``omega_quad[i, j]`` the vector
            coefficient of eta_i * eta_j in the next eta.
        k_quad: (3, 3, 3) array, ``k_quad[i, j]`` the vector coefficient of
            eta_i * dxi_j.
    """
    dt = model.dt
    xi = np.asarray(xi_bar, dtype=float)
    basis = np.eye(3)

    dexp_m = so3.dexp_matrix(-dt * xi)
    dexpinv_m = so3.dexpinv_matrix(dt * xi)

    # t[i, j] = e_i x (e_j x xi)
    ej_xi = np.cross(basis, xi[None, :])
    t_bracket = np.cross(basis[:, None, :], ej_xi[None, :, :])
    t1 = np.einsum("ab,ijb->ija", dexp_m, t_bracket)
    # t2[i, j] = e_i x (xi x (xi x e_j))
    xi_ej = np.cross(xi[None, :], basis)
    xi_xi_ej = np.cross(xi[None, :], xi_ej)
    t2 = np.cross(basis[:, None, :], xi_xi_ej[None, :, :])
    # t4[i, j] = d_i x (d_j x xi) with d_i the i-th column of dexpinv
    d_rows = dexpinv_m.T
    dj_xi = np.cross(d_rows, xi[None, :])
    t4 = np.cross(d_rows[:, None, :], dj_xi[None, :, :])
    omega_quad = (dt / 12.0) * (t1 + 0.5 * dt * t2 + 0.5 * dt * t_bracket - t4)

    # ee[i, j] = e_i x e_j
    ee = np.cross(basis[:, None, :], basis[None, :, :])
    s1 = np.einsum("ab,ijb->ija", dexp_m, ee)
    s2 = np.cross(xi[None, None, :], np.transpose(ee, (1, 0, 2)))
    s3 = np.cross(basis[None, :, :], xi_ej[:, None, :])
    s4 = np.cross(basis[:, None, :], xi_ej[None, :, :])
    k_quad = 0.5 * dt * (s1 + (dt / 6.0) * (s2 + 2.0 * s3 + s4))

    phi_xx = so3.exp_so3(-dt * xi)
    phi_xxi = dt * dexp_m
    return phi_xx, phi_xxi, omega_quad, k_quad


def linearize_step(model: SatelliteModel, g: BodyState, u: np.ndarray) -> LinearizedStep:
    """Second-order tangent propagation operators at a nominal state/control."""
    dt = model.dt
    iinv = model.inertia_inv
    m = model.num_controls
    phi_xx, phi_xxi, omega_quad, k_quad = linearize_kinematics(model, g.Omega)

    phi = np.zeros((6, 6))
    phi[:3, :3] = phi_xx
    phi[:3, 3:] = phi_xxi
    phi[3:, 3:] = np.eye(3) + dt * (
        iinv @ (-so3.hat(g.Omega) @ model.inertia + so3.hat(model.inertia @ g.Omega))
    )

    b = np.zeros((6, m))
    b[3:, :] = dt * (iinv @ model.torque_axes)

    theta = np.zeros((6, 6, 6))
    for i in range(3):
        theta[i, :3, :3] = omega_quad[:, :, i] + omega_quad[:, :, i].T
        theta[i, :3, 3:] = k_quad[:, :, i]
        theta[i, 3:, :3] = k_quad[:, :, i].T
    # Velocity block: second derivative of the gyroscopic term.
    basis = np.eye(3)
    gyro = np.cross(model.inertia.T[:, None, :], basis[None, :, :])
    gyro = gyro + np.transpose(gyro, (1, 0, 2))
    hess_vel = dt * np.einsum("ab,jlb->jla", iinv, gyro)
    for i in range(3):
        theta[3 + i, 3:, 3:] = hess_vel[:, :, i]

    gamma = np.zeros((6, 6, m))
    delta = np.zeros((6, m, 6))
    xi_op = np.zeros((6, m, m))
    return LinearizedStep(phi, b, theta, gamma, delta, xi_op)


def predict_perturbation(
    lin: LinearizedStep,
    zeta: np.ndarray,
    du: np.ndarray,
    second_order: bool = True,
) -> np.ndarray:
    """Propagate a stacked perturbation through the linearized step."""
    zeta = np.asarray(zeta, dtype=float)
    du = np.asarray(du, dtype=float)
    out = lin.Phi @ zeta + lin.B @ du
    if second_order:
        quad = (
            np.einsum("j,ijl,l->i", zeta, lin.Theta, zeta)
            + np.einsum("j,ijl,l->i", zeta, lin.Gamma, du)
            + np.einsum("j,ijl,l->i", du, lin.Delta, zeta)
            + np.einsum("j,ijl,l->i", du, lin.Xi, du)
        )
        out = out + 0.5 * quad
    return out


def first_order_oracle(
    model: SatelliteModel,
    xi_bar: np.ndarray,
    eta: np.ndarray,
    dxi: np.ndarray,
) -> np.ndarray:
    """Linear pose-perturbation update derived by direct differentiation.

    Independent re-derivation of the linear blocks of
    :func:`linearize_kinematics`; used as a cross-check in tests.
    """
    xi_bar = np.asarray(xi_bar, dtype=float)
    return so3.Ad(so3.exp_so3(-model.dt * xi_bar), eta) + model.dt * so3.dexp(
        -model.dt * xi_bar, dxi
    )
