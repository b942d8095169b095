"""ALIP-based MPC foot-placement gait controller and simulator."""

from .model import (
    AlipState,
    CentroidalMomentum,
    ComState,
    RobotParams,
    StanceSide,
    TerrainPlane,
    apply_impact,
    build_alip_matrix,
    expm_oracle,
    predict_to_impact,
    step_transition,
)
from .com_dynamics import com_dynamics_rhs, integrate_com
from .reference import (
    GaitCommand,
    DesiredImpactState,
    desired_impact_state,
    natural_frequency,
    stance_schedule,
    velocity_to_momentum,
)
from .constraints import (
    Interval,
    LinearInequalitySet,
    WorkspaceConfig,
    build_input_constraints,
    build_state_constraints,
    grf_ratios,
    slip_bound,
)
from .dare import dare_terminal_cost
from .qp import QpProblem, QpSolution, solve_qp
from .mpc import (
    FootPlan,
    FootstepPlanner,
    MpcConfig,
    condense,
    deadbeat_one_step,
    plan_footsteps,
)
from .swing import (
    OutputInit,
    SwingTargets,
    com_height_output,
    parabola_coeffs,
    phase,
    reference_outputs,
)

__version__ = "0.1.0"

__all__ = [
    "AlipState",
    "CentroidalMomentum",
    "ComState",
    "RobotParams",
    "StanceSide",
    "TerrainPlane",
    "apply_impact",
    "build_alip_matrix",
    "expm_oracle",
    "predict_to_impact",
    "step_transition",
    "com_dynamics_rhs",
    "integrate_com",
    "GaitCommand",
    "DesiredImpactState",
    "desired_impact_state",
    "natural_frequency",
    "stance_schedule",
    "velocity_to_momentum",
    "Interval",
    "LinearInequalitySet",
    "WorkspaceConfig",
    "build_input_constraints",
    "build_state_constraints",
    "grf_ratios",
    "slip_bound",
    "dare_terminal_cost",
    "QpProblem",
    "QpSolution",
    "solve_qp",
    "FootPlan",
    "FootstepPlanner",
    "MpcConfig",
    "condense",
    "deadbeat_one_step",
    "plan_footsteps",
    "OutputInit",
    "SwingTargets",
    "com_height_output",
    "parabola_coeffs",
    "phase",
    "reference_outputs",
    "__version__",
]
