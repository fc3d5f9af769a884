"""Trajectory optimizer built on a backward value recursion and a line search.

One outer iteration linearizes the transition around the nominal trajectory,
recursively assembles trivialized stage-value (Q) derivatives from the
terminal cost backwards, and rolls the system forward under the resulting
feedforward/feedback update, shrinking the feedforward scale until the cost
does not increase.  The velocity-space curvature (Quu) is shifted by a growing
regularizer whenever its factorization fails.

The quadratic terms of the step linearization can be switched off, which
reduces the backward pass to its Gauss-Newton-like variant; the ``switch``
scheme starts that way and enables the full expansion once the cost has
dropped below a prescribed fraction of its initial value.
"""

from dataclasses import dataclass, field

import numpy as np

from .cost import CostSpec, running_cost, running_derivatives, terminal_cost, terminal_derivatives
from .dynamics import (
    BodyState,
    LinearizedStep,
    SatelliteModel,
    linearize_step,
    perturbation_between,
    rollout,
    step,
)

SCHEMES = ("first", "second", "switch")


class IndefiniteQuuError(RuntimeError):
    """Raised when the regularized control-space curvature fails to factor."""

    def __init__(self, step_index: int):
        super().__init__(f"Quu not positive definite at step {step_index}")
        self.step_index = step_index


@dataclass
class QDerivatives:
    """Trivialized stage-value expansion at one step.

    ``Quu`` stores the matrix actually inverted, i.e. it includes the
    regularization shift when one was applied.
    """

    Q0: float
    Qg: np.ndarray
    Qu: np.ndarray
    Qgg: np.ndarray
    Qgu: np.ndarray
    Qug: np.ndarray
    Quu: np.ndarray


@dataclass
class ValueDerivatives:
    """Trivialized cost-to-go gradient row and symmetric Hessian."""

    vg: np.ndarray
    Vgg: np.ndarray


@dataclass
class GainSchedule:
    """Per-step feedforward vectors and feedback matrices."""

    kff: list
    K: list

    def __len__(self) -> int:
        return len(self.kff)


@dataclass
class PsiSequence:
    """Backward costate rows of the first-order cost recursion (length H+1)."""

    psi: list


@dataclass(frozen=True)
class SolverConfig:
    """Outer-loop tolerances and schedule parameters."""

    tol: float = 1e-8
    max_iters: int = 100
    h: float = 1.0 / 3.0
    lambda0: float = 1e-6
    lambda_growth: float = 1.9
    sigma: float = 0.1
    scheme: str = "switch"
    gamma_min: float = (1.0 / 3.0) ** 15

    def __post_init__(self):
        if self.tol <= 0 or self.max_iters <= 0 or self.lambda0 <= 0:
            raise ValueError("tol, max_iters and lambda0 must be positive")
        if not (0.0 < self.h < 1.0):
            raise ValueError("h must lie in (0, 1)")
        if not (0.0 < self.sigma < 1.0):
            raise ValueError("sigma must lie in (0, 1)")
        if self.lambda_growth <= 1.0 or self.gamma_min <= 0.0:
            raise ValueError("lambda_growth must exceed 1 and gamma_min be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")


@dataclass
class IterationRecord:
    """Diagnostics of one accepted outer iteration.

    ``max_Qu_norm`` refers to the backward pass evaluated at the nominal this
    iteration started from.
    """

    iteration: int
    J: float
    predicted_decrease: float
    gamma_used: float
    lambda_used: float
    scheme_active: str
    max_Qu_norm: float


@dataclass
class SolveResult:
    """Final trajectory/controls plus per-iteration history."""

    trajectory: list
    controls: np.ndarray
    records: list
    converged: bool
    final_cost: float
    final_max_Qu_norm: float
    controls_history: list = field(repr=False, default_factory=list)
    switch_iteration: int | None = None


def total_cost(spec: CostSpec, trajectory: list, controls: np.ndarray) -> float:
    j = sum(running_cost(spec, g, u) for g, u in zip(trajectory, controls))
    return j + terminal_cost(spec, trajectory[-1])


def backward_pass(
    model: SatelliteModel,
    spec: CostSpec,
    trajectory: list,
    controls: np.ndarray,
    lam: float = 0.0,
    use_second_order: bool = True,
    lin_steps: list | None = None,
):
    """Backward recursion of the trivialized value expansion.

    Args:
        trajectory: nominal states (H+1), consistent with ``controls`` under
            the transition.
        lam: nonnegative shift added to Quu before inversion.
        use_second_order: include the quadratic transition operators; when
            False all Theta/Gamma/Delta/Xi contractions are omitted.
        lin_steps: optional precomputed per-step linearizations.

    Returns:
        (GainSchedule, list of QDerivatives, list of ValueDerivatives), the
        last with H+1 entries.

    Raises:
        IndefiniteQuuError: the shifted Quu failed its Cholesky factorization
            at some step; the caller is expected to grow ``lam`` and retry.
    """
    horizon = len(controls)
    m = model.num_controls
    if lin_steps is None:
        lin_steps = [linearize_step(model, trajectory[k], controls[k]) for k in range(horizon)]

    stage_costs = [running_cost(spec, trajectory[k], controls[k]) for k in range(horizon)]
    cost_to_go = np.zeros(horizon + 1)
    cost_to_go[horizon] = terminal_cost(spec, trajectory[horizon])
    for k in reversed(range(horizon)):
        cost_to_go[k] = stage_costs[k] + cost_to_go[k + 1]

    vg, vgg = terminal_derivatives(spec, trajectory[horizon])
    values: list = [None] * (horizon + 1)
    values[horizon] = ValueDerivatives(vg, vgg)
    qlist: list = [None] * horizon
    kffs: list = [None] * horizon
    gains_k: list = [None] * horizon

    eye_m = np.eye(m)
    for k in reversed(range(horizon)):
        lin: LinearizedStep = lin_steps[k]
        cd = running_derivatives(spec, trajectory[k], controls[k])
        vnext = values[k + 1]

        qg = cd.lg + vnext.vg @ lin.Phi
        qu = cd.lu + vnext.vg @ lin.B
        qgg = cd.lgg + lin.Phi.T @ vnext.Vgg @ lin.Phi
        qgu = cd.lgu + lin.Phi.T @ vnext.Vgg @ lin.B
        qug = cd.lug + lin.B.T @ vnext.Vgg @ lin.Phi
        quu = cd.luu + lin.B.T @ vnext.Vgg @ lin.B
        if use_second_order:
            qgg = qgg + np.einsum("i,ijl->jl", vnext.vg, lin.Theta)
            qgu = qgu + np.einsum("i,ijl->jl", vnext.vg, lin.Gamma)
            qug = qug + np.einsum("i,ijl->jl", vnext.vg, lin.Delta)
            quu = quu + np.einsum("i,ijl->jl", vnext.vg, lin.Xi)

        quu_shifted = quu + lam * eye_m
        try:
            np.linalg.cholesky(quu_shifted)
        except np.linalg.LinAlgError:
            raise IndefiniteQuuError(k) from None

        kff = -np.linalg.solve(quu_shifted, qu)
        gain = -np.linalg.solve(quu_shifted, qug)

        vg_k = qg + qu @ gain
        vgg_k = qgg + qgu @ gain
        # The exact recursion is symmetric; projecting kills fp drift.
        vgg_k = 0.5 * (vgg_k + vgg_k.T)

        values[k] = ValueDerivatives(vg_k, vgg_k)
        qlist[k] = QDerivatives(
            Q0=stage_costs[k] + cost_to_go[k + 1],
            Qg=qg,
            Qu=qu,
            Qgg=qgg,
            Qgu=qgu,
            Qug=qug,
            Quu=quu_shifted,
        )
        kffs[k] = kff
        gains_k[k] = gain

    return GainSchedule(kffs, gains_k), qlist, values


def forward_pass(
    model: SatelliteModel,
    spec: CostSpec,
    trajectory: list,
    controls: np.ndarray,
    gains: GainSchedule,
    gamma: float,
):
    """Closed-loop rollout applying the scaled feedforward plus feedback.

    State deviations feeding the feedback are recomputed from the true new
    states through the group logarithm, not propagated through the linear
    model.  Returns (new trajectory, new controls, cost); a diverged rollout
    is signalled with an infinite cost.
    """
    horizon = len(controls)
    new_controls = np.empty_like(np.asarray(controls, dtype=float))
    g = trajectory[0]
    new_traj = [g]
    j = 0.0
    for k in range(horizon):
        if k == 0:
            zeta = np.zeros(6)
        else:
            try:
                zeta = perturbation_between(trajectory[k], g).vector
            except ValueError:
                return None, None, np.inf
        u = controls[k] + gamma * gains.kff[k] + gains.K[k] @ zeta
        j += running_cost(spec, g, u)
        g = step(model, g, u)
        new_traj.append(g)
        new_controls[k] = u
    j += terminal_cost(spec, g)
    if not np.isfinite(j):
        return None, None, np.inf
    return new_traj, new_controls, j


def predicted_decrease(qlist: list, gamma: float) -> float:
    """First-order cost-change prediction of the scaled update; always <= 0."""
    total = 0.0
    for q in qlist:
        total += float(q.Qu @ np.linalg.solve(q.Quu, q.Qu))
    return -gamma * total


def psi_recursion(
    model: SatelliteModel,
    spec: CostSpec,
    trajectory: list,
    controls: np.ndarray,
) -> PsiSequence:
    """Backward costate rows built from the linear operators only."""
    horizon = len(controls)
    psi: list = [None] * (horizon + 1)
    psi[horizon], _ = terminal_derivatives(spec, trajectory[horizon])
    for k in reversed(range(horizon)):
        lin = linearize_step(model, trajectory[k], controls[k])
        cd = running_derivatives(spec, trajectory[k], controls[k])
        psi[k] = cd.lg + psi[k + 1] @ lin.Phi
    return PsiSequence(psi)


def gradient_oracle(
    model: SatelliteModel,
    spec: CostSpec,
    trajectory: list,
    controls: np.ndarray,
) -> np.ndarray:
    """Exact trivialized cost gradient with respect to each control row."""
    horizon = len(controls)
    m = model.num_controls
    psis = psi_recursion(model, spec, trajectory, controls).psi
    grad = np.zeros((horizon, m))
    for k in range(horizon):
        lin = linearize_step(model, trajectory[k], controls[k])
        cd = running_derivatives(spec, trajectory[k], controls[k])
        grad[k] = cd.lu + psis[k + 1] @ lin.B
    return grad


def _regularized_backward(
    model: SatelliteModel,
    spec: CostSpec,
    trajectory: list,
    controls: np.ndarray,
    config: SolverConfig,
    use_second_order: bool,
):
    """Backward pass with the shift grown geometrically until Quu factors."""
    horizon = len(controls)
    lin_steps = [linearize_step(model, trajectory[k], controls[k]) for k in range(horizon)]
    lam = 0.0
    while True:
        try:
            gains, qlist, values = backward_pass(
                model,
                spec,
                trajectory,
                controls,
                lam=lam,
                use_second_order=use_second_order,
                lin_steps=lin_steps,
            )
            return gains, qlist, values, lam
        except IndefiniteQuuError:
            lam = config.lambda0 if lam == 0.0 else lam * config.lambda_growth
            if lam > 1e16:
                raise RuntimeError("regularization grew unbounded") from None


def solve(
    model: SatelliteModel,
    spec: CostSpec,
    config: SolverConfig,
    g0: BodyState,
    initial_controls: np.ndarray,
) -> SolveResult:
    """Iterate backward/forward passes from an initial control sequence.

    Convergence is declared when the cost change between accepted iterations
    falls to ``config.tol`` in magnitude.  If the line search exhausts its
    floor the best sequence found so far is returned with ``converged=False``.
    """
    controls = np.array(initial_controls, dtype=float)
    trajectory = rollout(model, g0, controls)
    j = total_cost(spec, trajectory, controls)
    j_initial = j

    use_second = config.scheme == "second"
    records: list = []
    history = [controls.copy()]
    converged = False
    switch_iteration: int | None = None

    for iteration in range(1, config.max_iters + 1):
        gains, qlist, _, lam = _regularized_backward(
            model, spec, trajectory, controls, config, use_second
        )
        max_qu = max(float(np.linalg.norm(q.Qu)) for q in qlist)

        gamma = 1.0
        accepted = False
        while gamma >= config.gamma_min * (1.0 - 1e-12):
            new_traj, new_controls, j_new = forward_pass(
                model, spec, trajectory, controls, gains, gamma
            )
            if j_new <= j:
                accepted = True
                break
            gamma *= config.h
        if not accepted:
            break

        records.append(
            IterationRecord(
                iteration=iteration,
                J=j_new,
                predicted_decrease=predicted_decrease(qlist, gamma),
                gamma_used=gamma,
                lambda_used=lam,
                scheme_active="second" if use_second else "first",
                max_Qu_norm=max_qu,
            )
        )
        trajectory, controls = new_traj, new_controls
        history.append(controls.copy())
        delta = j - j_new
        j = j_new
        if abs(delta) <= config.tol:
            converged = True
            break
        if (
            config.scheme == "switch"
            and not use_second
            and j_initial > 0.0
            and j / j_initial < config.sigma
        ):
            use_second = True
            switch_iteration = iteration

    _, final_qlist, _, _ = _regularized_backward(
        model, spec, trajectory, controls, config, use_second
    )
    final_max_qu = max(float(np.linalg.norm(q.Qu)) for q in final_qlist)

    return SolveResult(
        trajectory=trajectory,
        controls=controls,
        records=records,
        converged=converged,
        final_cost=j,
        final_max_Qu_norm=final_max_qu,
        controls_history=history,
        switch_iteration=switch_iteration,
    )
