"""Receding-horizon foot-placement planner.

States are eliminated through the affine horizon maps, leaving a dense QP
in the stacked placements.  Stage cost applies only at step-transition
samples (pre-impact states) plus a Riccati terminal weight, so the Hessian,
constraint rows and their factorizations depend only on controller
geometry and the terrain preview; re-planning at a new measured state is a
handful of 4-vector updates plus a warm-started active-set solve.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .constraints import (
    LinearInequalitySet,
    WorkspaceConfig,
    build_input_constraints,
    build_state_constraints,
)
from .dare import dare_terminal_cost, step_dynamics_pair
from .errors import InvalidParameterError
from .horizon import HorizonGeometry, build_horizon
from .model import (
    AlipState,
    RobotParams,
    StanceSide,
    TerrainPlane,
    predict_to_impact,
)
from .qp import QpFactor, QpProblem, QpSolution, solve_qp_dense
from .reference import (
    DesiredImpactState,
    GaitCommand,
    desired_impact_state,
    velocity_to_momentum,
)

__all__ = [
    "MpcConfig",
    "FootPlan",
    "FootstepPlanner",
    "condense",
    "plan_footsteps",
    "deadbeat_one_step",
]

DEFAULT_Q_STEP = np.diag([1.0, 1.0, 0.05, 0.05])


@dataclass(frozen=True)
class MpcConfig:
    """Horizon geometry, weights and workspace limits of the planner."""

    N_s: int = 4
    N_dt: int = 30
    Q_step: np.ndarray = field(default_factory=lambda: DEFAULT_Q_STEP.copy())
    Q_f: Optional[np.ndarray] = None  # computed from the Riccati equation when None
    workspace: WorkspaceConfig = field(default_factory=WorkspaceConfig)
    regularization: float = 1e-9
    dare_mode: str = "one-step"
    state_constraints: bool = True
    input_constraints: bool = True

    def __post_init__(self) -> None:
        if self.N_s < 1 or self.N_dt < 1:
            raise InvalidParameterError(
                f"N_s and N_dt must be >= 1 (got {self.N_s}, {self.N_dt})"
            )
        Q = np.asarray(self.Q_step, dtype=float)
        if Q.shape != (4, 4) or not np.allclose(Q, Q.T, atol=1e-12):
            raise InvalidParameterError("Q_step must be a symmetric 4x4 matrix")
        if np.any(np.linalg.eigvalsh(Q) < -1e-12):
            raise InvalidParameterError("Q_step must be positive semidefinite")
        if self.regularization <= 0:
            raise InvalidParameterError("regularization must be positive")


@dataclass
class FootPlan:
    """Solved placement sequence with predicted states and diagnostics."""

    u_sequence: np.ndarray            # (N_s, 2)
    x0: np.ndarray                    # predicted pre-impact state used by the QP
    solution: QpSolution
    geometry: HorizonGeometry = field(repr=False, default=None)
    x_des: np.ndarray = field(repr=False, default=None)  # (N_s, 4)
    rows: LinearInequalitySet = field(repr=False, default=None)
    fallback: bool = False

    @property
    def u_first(self) -> np.ndarray:
        return self.u_sequence[0]

    @cached_property
    def states(self) -> np.ndarray:
        """Predicted states at every intra-step sample, (N+1, 4)."""
        return self.geometry.predict(self.x0, self.u_sequence.reshape(-1))

    def violated_rows(self) -> list[str]:
        """Provenance of the rows certifying infeasibility, when any."""
        if self.rows is None or self.solution.ok:
            return []
        return [self.rows.describe_row(r) for r in self.solution.certificate]


class FootstepPlanner:
    """Planner with per-geometry caches; one instance per control thread."""

    def __init__(self, config: MpcConfig, params: RobotParams, terrain: TerrainPlane):
        self.config = config
        self.params = params
        self._geometry = build_horizon(params, terrain, config.N_s, config.N_dt)
        Q_f = config.Q_f
        if Q_f is None:
            Q_f = dare_terminal_cost(
                params,
                terrain,
                config.Q_step,
                mode=config.dare_mode,
                regularization=config.regularization,
            )
        Q_f = np.asarray(Q_f, dtype=float)
        if Q_f.shape != (4, 4) or not np.allclose(Q_f, Q_f.T, atol=1e-9):
            raise InvalidParameterError("Q_f must be a symmetric 4x4 matrix")
        self.Q_f = Q_f
        self._cost_cache: dict = {}
        self._rows_cache: dict = {}
        self._des_cache: dict = {}
        self._warm_start: tuple[int, ...] = ()

    @property
    def geometry(self) -> HorizonGeometry:
        return self._geometry

    # -- cached pieces -----------------------------------------------------

    def _cost_terms(self):
        """Hessian and the stacked per-impact gradient maps."""
        hit = self._cost_cache.get("cost")
        if hit is not None:
            return hit
        geo = self._geometry
        n = geo.n_vars
        H = 2.0 * self.config.regularization * np.eye(n)
        Phi_stack = np.empty((geo.N_s, 4, 4))
        QG_stack = np.empty((geo.N_s, 4, n))
        for j in range(1, geo.N_s + 1):
            i = j * geo.N_dt
            Q_j = self.config.Q_step if j < geo.N_s else self.Q_f
            QG = Q_j @ geo.Gamma[i]
            H += 2.0 * geo.Gamma[i].T @ QG
            Phi_stack[j - 1] = geo.Phi[i]
            QG_stack[j - 1] = 2.0 * QG
        H = 0.5 * (H + H.T)
        # gradient = QG_flat^T (Phi_flat x0 - xdes_flat)
        hit = (H, Phi_stack.reshape(-1, 4), QG_stack.reshape(-1, n))
        self._cost_cache["cost"] = hit
        return hit

    def _desired(self, cmd: GaitCommand, stance: StanceSide, terrain: TerrainPlane):
        key = (cmd, stance, terrain)
        hit = self._des_cache.get(key)
        if hit is None:
            seq = self.desired_sequence(cmd, stance, terrain)
            stacked = np.concatenate([d.state.as_array() for d in seq])
            if len(self._des_cache) > 256:
                self._des_cache.clear()
            hit = (seq, stacked)
            self._des_cache[key] = hit
        return hit

    def _constraint_rows(
        self,
        stance: StanceSide,
        terrain_preview: tuple[TerrainPlane, ...],
    ) -> tuple[LinearInequalitySet, QpFactor]:
        geo = self._geometry
        key = (stance, terrain_preview)  # frozen dataclasses hash by value
        hit = self._rows_cache.get(key)
        if hit is not None:
            return hit
        state_stances = [geo.stance_of_step(j, stance) for j in range(1, geo.N_s + 1)]
        input_stances = [geo.stance_of_step(j, stance) for j in range(geo.N_s)]
        rows = LinearInequalitySet(n_vars=geo.n_vars)
        if self.config.state_constraints:
            per_sample = [
                terrain_preview[(i - 1) // geo.N_dt]
                for i in range(1, geo.n_samples + 1)
            ]
            rows = rows.concat(
                build_state_constraints(self.config.workspace, per_sample, state_stances, geo)
            )
        if self.config.input_constraints:
            rows = rows.concat(build_input_constraints(self.config.workspace, input_stances))
        factor = QpFactor.build(self._cost_terms()[0], rows.G)
        if len(self._rows_cache) > 64:
            self._rows_cache.clear()
        self._rows_cache[key] = (rows, factor)
        return rows, factor

    # -- public API ----------------------------------------------------------

    def desired_sequence(
        self,
        cmd: GaitCommand,
        stance: StanceSide,
        terrain: TerrainPlane,
    ) -> list[DesiredImpactState]:
        L_y = velocity_to_momentum(cmd.v_x_des, self.params, terrain)
        geo = self._geometry
        return [
            desired_impact_state(
                L_y, cmd, geo.stance_of_step(j, stance), self.params, terrain
            )
            for j in range(1, geo.N_s + 1)
        ]

    def condense(
        self,
        x0: AlipState,
        x_des: Sequence[DesiredImpactState],
        terrain: TerrainPlane,
        terrain_preview: Optional[Sequence[TerrainPlane]] = None,
    ) -> QpProblem:
        geo = self._geometry
        if len(x_des) != geo.N_s:
            raise InvalidParameterError(
                f"need {geo.N_s} desired impact states, got {len(x_des)}"
            )
        for j in range(1, len(x_des)):
            if x_des[j].stance is x_des[j - 1].stance:
                raise InvalidParameterError("desired impact states must alternate stance")
        stacked = np.concatenate([d.state.as_array() for d in x_des])
        H, f, rows, ub, _factor = self._condense_arrays(
            x0.as_array(), stacked, x_des[0].stance.other, terrain, terrain_preview
        )
        return QpProblem(H=H, f=f, ineq=rows, ub=ub)

    def _condense_arrays(
        self,
        x0v: np.ndarray,
        x_des_flat: np.ndarray,
        stance_now: StanceSide,
        terrain: TerrainPlane,
        terrain_preview: Optional[Sequence[TerrainPlane]],
    ) -> tuple[np.ndarray, np.ndarray, LinearInequalitySet, np.ndarray, QpFactor]:
        geo = self._geometry
        H, Phi_flat, QG_flat = self._cost_terms()
        f = (Phi_flat @ x0v - x_des_flat) @ QG_flat
        preview = (
            tuple(terrain_preview) if terrain_preview is not None else (terrain,) * geo.N_s
        )
        if len(preview) != geo.N_s:
            raise InvalidParameterError(
                f"terrain preview needs {geo.N_s} per-step entries, got {len(preview)}"
            )
        rows, factor = self._constraint_rows(stance_now, preview)
        return H, f, rows, rows.upper_bounds(x0v), factor

    def plan(
        self,
        x_t: AlipState,
        time_remaining: float,
        cmd: GaitCommand,
        stance: StanceSide,
        terrain: TerrainPlane,
        terrain_preview: Optional[Sequence[TerrainPlane]] = None,
    ) -> FootPlan:
        x0 = predict_to_impact(x_t, time_remaining, self.params, terrain)
        x_des, stacked = self._desired(cmd, stance, terrain)
        H, f, rows, ub, factor = self._condense_arrays(
            x0.as_array(), stacked, stance, terrain, terrain_preview
        )
        sol = solve_qp_dense(
            H, f, rows.G, ub, warm_start=self._warm_start, factor=factor
        )
        if sol.ok:
            self._warm_start = sol.active
        return FootPlan(
            u_sequence=sol.primal.reshape(self._geometry.N_s, 2),
            x0=x0.as_array(),
            solution=sol,
            geometry=self._geometry,
            x_des=stacked.reshape(self._geometry.N_s, 4),
            rows=rows,
        )

    def reset_warm_start(self) -> None:
        self._warm_start = ()


def condense(
    x0: AlipState,
    x_des: Sequence[DesiredImpactState],
    config: MpcConfig,
    params: RobotParams,
    terrain: TerrainPlane,
    terrain_preview: Optional[Sequence[TerrainPlane]] = None,
) -> QpProblem:
    """One-shot condensing without planner caching."""
    return FootstepPlanner(config, params, terrain).condense(
        x0, x_des, terrain, terrain_preview
    )


def plan_footsteps(
    x_t: AlipState,
    time_remaining: float,
    cmd: GaitCommand,
    stance: StanceSide,
    config: MpcConfig,
    params: RobotParams,
    terrain: TerrainPlane,
    terrain_preview: Optional[Sequence[TerrainPlane]] = None,
) -> FootPlan:
    """One-shot receding-horizon solve; see :class:`FootstepPlanner`."""
    return FootstepPlanner(config, params, terrain).plan(
        x_t, time_remaining, cmd, stance, terrain, terrain_preview
    )


def deadbeat_one_step(
    x0: AlipState,
    target_momenta: Sequence[float],
    params: RobotParams,
    terrain: TerrainPlane,
) -> np.ndarray:
    """Placement that lands the angular momenta on target one step later.

    Solves the 2x2 linear map from (u_x, u_y) to (L_x, L_y) at the end of
    the next step given the pre-impact state; it is invertible whenever
    m z_H ell sinh(ell T_s) is nonzero, i.e. always for valid parameters.
    """
    A_d, B_d = step_dynamics_pair(params, terrain)
    target = np.asarray(target_momenta, dtype=float).reshape(2)
    M = B_d[2:, :]
    free = (A_d @ x0.as_array())[2:]
    if abs(np.linalg.det(M)) < 1e-12:
        raise InvalidParameterError("momentum map is singular")
    return np.linalg.solve(M, target - free)
