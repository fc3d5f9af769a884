"""Trajectory optimization for rigid-body attitude on SO(3) x R^3."""

from .cost import CostDerivatives, CostSpec, running_cost, running_derivatives, terminal_cost, terminal_derivatives
from .dynamics import (
    BodyState,
    LinearizedStep,
    SatelliteModel,
    TangentPerturbation,
    first_order_oracle,
    linearize_kinematics,
    linearize_step,
    perturbation_between,
    predict_perturbation,
    retract,
    rollout,
    step,
)
from .solver import (
    GainSchedule,
    IndefiniteQuuError,
    IterationRecord,
    PsiSequence,
    QDerivatives,
    SolveResult,
    SolverConfig,
    ValueDerivatives,
    backward_pass,
    forward_pass,
    gradient_oracle,
    predicted_decrease,
    psi_recursion,
    solve,
    total_cost,
)

__version__ = "0.1.0"

__all__ = [
    "BodyState",
    "CostDerivatives",
    "CostSpec",
    "GainSchedule",
    "IndefiniteQuuError",
    "IterationRecord",
    "LinearizedStep",
    "PsiSequence",
    "QDerivatives",
    "SatelliteModel",
    "SolveResult",
    "SolverConfig",
    "TangentPerturbation",
    "ValueDerivatives",
    "backward_pass",
    "first_order_oracle",
    "forward_pass",
    "gradient_oracle",
    "linearize_kinematics",
    "linearize_step",
    "perturbation_between",
    "predict_perturbation",
    "predicted_decrease",
    "psi_recursion",
    "retract",
    "rollout",
    "running_cost",
    "running_derivatives",
    "solve",
    "step",
    "terminal_cost",
    "terminal_derivatives",
    "total_cost",
]
