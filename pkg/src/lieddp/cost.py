"""Quadratic control cost with an attitude/rate terminal penalty.

Running cost is a pure control penalty; the terminal term weighs the rotation
residual through a weighted Frobenius norm and the rate residual through a
weighted Euclidean norm.  Derivatives with respect to the state are
trivialized: gradients are rows paired with stacked (eta, dxi) perturbation
columns by plain matrix product.
"""

from dataclasses import dataclass

import numpy as np

from . import so3
from .dynamics import BodyState


def _check_weight(name: str, w: np.ndarray, dim: int, definite: bool) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (dim, dim) or np.linalg.norm(w - w.T) > 1e-9:
        raise ValueError(f"{name} must be a symmetric {dim}x{dim} matrix")
    lo = np.min(np.linalg.eigvalsh(w))
    if definite and lo <= 0.0:
        raise ValueError(f"{name} must be positive definite")
    if not definite and lo < -1e-12:
        raise ValueError(f"{name} must be positive semidefinite")
    return w


@dataclass(frozen=True)
class CostSpec:
    """Weights and targets of the benchmark objective.

    ``Su`` must be positive definite; the terminal weights may be merely
    positive semidefinite so that weight-free runs are expressible.
    """

    Su: np.ndarray
    SR: np.ndarray
    SOmega: np.ndarray
    Rd: np.ndarray
    Omegad: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.Su).shape[0]
        object.__setattr__(self, "Su", _check_weight("Su", self.Su, m, definite=True))
        object.__setattr__(self, "SR", _check_weight("SR", self.SR, 3, definite=False))
        object.__setattr__(self, "SOmega", _check_weight("SOmega", self.SOmega, 3, definite=False))
        object.__setattr__(self, "Rd", so3.check_rotation(self.Rd))
        object.__setattr__(self, "Omegad", np.asarray(self.Omegad, dtype=float))

    @property
    def num_controls(self) -> int:
        return self.Su.shape[0]


@dataclass
class CostDerivatives:
    """Trivialized running-cost derivatives at one step.

    Rows (lg, lu) pair with perturbation columns by matrix product;
    ``lug`` equals ``lgu`` transposed.
    """

    lg: np.ndarray
    lu: np.ndarray
    lgg: np.ndarray
    luu: np.ndarray
    lgu: np.ndarray
    lug: np.ndarray


def running_cost(spec: CostSpec, g: BodyState, u: np.ndarray) -> float:
    """Control effort penalty; independent of the state."""
    u = np.asarray(u, dtype=float)
    return 0.5 * float(u @ spec.Su @ u)


def terminal_cost(spec: CostSpec, g: BodyState) -> float:
    """Weighted rotation and rate residual at the final state."""
    c = np.eye(3) - spec.Rd.T @ g.R
    w = g.Omega - spec.Omegad
    return 0.5 * float(np.trace(c.T @ spec.SR @ c)) + 0.5 * float(w @ spec.SOmega @ w)


def running_derivatives(spec: CostSpec, g: BodyState, u: np.ndarray) -> CostDerivatives:
    """First and second derivatives of the running cost; state blocks vanish."""
    u = np.asarray(u, dtype=float)
    m = spec.num_controls
    return CostDerivatives(
        lg=np.zeros(6),
        lu=spec.Su @ u,
        lgg=np.zeros((6, 6)),
        luu=spec.Su.copy(),
        lgu=np.zeros((6, m)),
        lug=np.zeros((m, 6)),
    )


def terminal_derivatives(spec: CostSpec, g: BodyState) -> tuple[np.ndarray, np.ndarray]:
    """Trivialized gradient row and symmetric Hessian of the terminal cost."""
    m = spec.SR @ spec.Rd.T @ g.R
    vg = np.concatenate([so3.vee(m - m.T), spec.SOmega @ (g.Omega - spec.Omegad)])
    rot_block = np.trace(m) * np.eye(3) - m
    rot_block = 0.5 * (rot_block + rot_block.T)
    vgg = np.zeros((6, 6))
    vgg[:3, :3] = rot_block
    vgg[3:, 3:] = spec.SOmega
    return vg, vgg
