"""Closed-loop executor: plant + receding-horizon controller + events.

The plant integrates at a fixed step, the controller re-plans every tick
(250 Hz by default), and at each step boundary the most recent plan's
first placement is applied through the impact map.  When the controller's
believed terrain differs from the true terrain, the landing height of the
swing foot differs from the commanded one and the angular-momentum
reference-point change picks up the unmodeled part:

    dL_x = +m * dz * dy_c,   dL_y = -m * dz * dx_c,
    dz   = (k_true - k_believed) . u_fp

which vanishes exactly when the beliefs match (recovering the plain
impact map) and produces the physically-signed downhill drift otherwise.
"""
from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from .com_dynamics import _rhs_array
from .constraints import WorkspaceConfig, slip_bound
from .errors import (
    InvalidParameterError,
    ScenarioError,
    SingularGeometryError,
    SlipBoundInfeasibleError,
)
from .model import (
    AlipState,
    CentroidalMomentum,
    StanceSide,
    TerrainPlane,
    ZERO_CENTROIDAL,
    build_alip_matrix,
    predict_to_impact,
)
from .mpc import FootPlan, FootstepPlanner, deadbeat_one_step
from .qp import STATUS_OPTIMAL
from .reference import (
    desired_impact_state,
    orbit_post_impact_state,
    velocity_to_momentum,
)
from .scenario import Scenario
from .simlog import (
    EVENT_FALLBACK,
    EVENT_MECH,
    EVENT_PLANT_SINGULAR,
    EVENT_QP_INFEASIBLE,
    EVENT_SLIP,
    Event,
    SimLog,
)

__all__ = ["run_closed_loop", "detect_events"]


class _AlipPlant:
    """Linear plant advanced by a precomputed RK4 one-tick matrix."""

    def __init__(self, scenario: Scenario):
        A = build_alip_matrix(scenario.robot, scenario.terrain_schedule[0][1])
        h = scenario.plant_step
        hA = h * A
        M = np.eye(4) + hA
        P = hA.copy()
        for k in (2, 3, 4):
            P = P @ hA / k
            M = M + P
        sub = int(round(scenario.controller_period / h))
        self._tick_matrix = np.linalg.matrix_power(M, sub)
        self._A = A
        self._scenario = scenario

    def advance_tick(self, x: np.ndarray, t: float) -> np.ndarray:
        return self._tick_matrix @ x

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return (self._A @ x)[:2]


class _ExactPlant:
    """Nonlinear CoM plant integrated by fixed-step RK4."""

    def __init__(self, scenario: Scenario):
        self._scenario = scenario
        self._params = scenario.robot
        self._h = scenario.plant_step
        self._sub = int(round(scenario.controller_period / self._h))

    def _lc(self, t: float) -> CentroidalMomentum:
        a = self._scenario.Lc_amplitude
        if a == 0.0:
            return ZERO_CENTROIDAL
        w = 2.0 * math.pi * self._scenario.Lc_frequency
        return CentroidalMomentum(a * math.sin(w * t), a * math.cos(w * t), 0.0)

    def advance_tick(self, x: np.ndarray, t: float) -> np.ndarray:
        terr = self._scenario.terrain_at(t)
        h = self._h
        for i in range(self._sub):
            ti = t + i * h
            k1 = _rhs_array(x, self._lc(ti), self._params, terr, "exact-pre")
            k2 = _rhs_array(x + 0.5 * h * k1, self._lc(ti + 0.5 * h), self._params, terr, "exact-pre")
            k3 = _rhs_array(x + 0.5 * h * k2, self._lc(ti + 0.5 * h), self._params, terr, "exact-pre")
            k4 = _rhs_array(x + h * k3, self._lc(ti + h), self._params, terr, "exact-pre")
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return x

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        terr = self._scenario.terrain_at(t)
        return _rhs_array(x, self._lc(t), self._params, terr, "exact-pre")[:2]


def _impact_update(
    x: np.ndarray,
    u: np.ndarray,
    true_terrain: TerrainPlane,
    believed_terrain: TerrainPlane,
    m: float,
    vel_xy: np.ndarray,
) -> np.ndarray:
    dz = (true_terrain.k_x - believed_terrain.k_x) * u[0] + (
        true_terrain.k_y - believed_terrain.k_y
    ) * u[1]
    return np.array(
        [
            x[0] - u[0],
            x[1] - u[1],
            x[2] + m * dz * vel_xy[1],
            x[3] - m * dz * vel_xy[0],
        ]
    )


def _believed(scenario: Scenario, terrain: TerrainPlane) -> TerrainPlane:
    return terrain.flattened() if scenario.terrain_mode == "flat" else terrain


def run_closed_loop(scenario: Scenario) -> SimLog:
    """Deterministic closed-loop run; see the scenario schema for knobs."""
    params = scenario.robot
    T_s = params.T_s
    period = scenario.controller_period
    ticks_per_step = int(round(T_s / period))
    n_ticks = int(round(scenario.duration / period))

    terr0 = scenario.terrain_schedule[0][1]
    cmd0 = scenario.command_schedule[0][1]
    sf = scenario.mpc.workspace.mu_safety_factor

    if scenario.initial_state is not None:
        x = scenario.initial_state.as_array()
    else:
        L_y0 = velocity_to_momentum(cmd0.v_x_des, params, terr0)
        x = orbit_post_impact_state(
            L_y0, cmd0, scenario.initial_stance, params, terr0
        ).as_array()

    plant = _AlipPlant(scenario) if scenario.plant_kind == "alip" else _ExactPlant(scenario)
    planner = FootstepPlanner(scenario.mpc, params, _believed(scenario, terr0))

    log = SimLog()
    stance = scenario.initial_stance
    step_index = 0
    plan: Optional[FootPlan] = None
    fallback_flags: list[bool] = []

    def terminate(event: Event) -> SimLog:
        log.events.append(event)
        log.terminal_event = event
        log.truncated = True
        return _finalize(log, scenario, fallback_flags)

    for i in range(n_ticks + 1):
        t = i * period
        ufp_applied = (None, None)

        if i > 0 and i % ticks_per_step == 0:
            # impact: apply the freshest placement, flip stance
            u = plan.u_first if plan is not None else np.zeros(2)
            true_terr = scenario.terrain_at(t)
            vel = plant.velocity(x, t)
            x = _impact_update(
                x, u, true_terr, _believed(scenario, true_terr), params.m, vel
            )
            stance = stance.other
            step_index += 1
            ufp_applied = (float(u[0]), float(u[1]))

        true_terr = scenario.terrain_at(t)
        cmd = scenario.command_at(t)
        believed_now = _believed(scenario, true_terr)
        t_rem = (ticks_per_step - (i % ticks_per_step)) * period

        if scenario.preview:
            t_impact = (step_index + 1) * T_s
            preview = [
                _believed(scenario, scenario.terrain_at(t_impact + j * T_s))
                for j in range(1, scenario.mpc.N_s + 1)
            ]
        else:
            preview = None

        t_solve = time.perf_counter()
        try:
            plan = planner.plan(
                AlipState.from_array(x), t_rem, cmd, stance, believed_now, preview
            )
        except (SlipBoundInfeasibleError, InvalidParameterError) as exc:
            return terminate(Event(EVENT_PLANT_SINGULAR, t, f"planner error: {exc}", log.n_rows))
        wall = time.perf_counter() - t_solve

        if not plan.solution.ok:
            detail = "; ".join(plan.violated_rows()[:6]) or plan.solution.status
            log.events.append(Event(EVENT_QP_INFEASIBLE, t, detail, log.n_rows))
            if not scenario.allow_fallback:
                return terminate(
                    Event(EVENT_QP_INFEASIBLE, t, f"unrecoverable: {detail}", log.n_rows)
                )
            x0 = predict_to_impact(AlipState.from_array(x), t_rem, params, believed_now)
            L_y = velocity_to_momentum(cmd.v_x_des, params, believed_now)
            target = desired_impact_state(L_y, cmd, stance.other, params, believed_now)
            u_db = deadbeat_one_step(x0, (target.state.L_x, target.state.L_y), params, believed_now)
            ws = scenario.mpc.workspace
            u_db = np.array(
                [ws.u_x_bounds.clamp(u_db[0]), ws.u_y_bounds(stance).clamp(u_db[1])]
            )
            log.events.append(
                Event(EVENT_FALLBACK, t, f"deadbeat placement {u_db.round(4).tolist()}", log.n_rows)
            )
            plan = FootPlan(
                u_sequence=np.tile(u_db, (scenario.mpc.N_s, 1)),
                x0=x0.as_array(),
                solution=plan.solution,
                geometry=plan.geometry,
                rows=plan.rows,
                fallback=True,
            )

        try:
            sb_x = slip_bound(true_terr.k_x, true_terr.mu, true_terr.z_H, sf)
            sb_y = slip_bound(true_terr.k_y, true_terr.mu, true_terr.z_H, sf)
        except SlipBoundInfeasibleError as exc:
            return terminate(Event(EVENT_SLIP, t, f"terrain unwalkable: {exc}", log.n_rows))

        log.append(
            t=t,
            step_index=step_index,
            stance=stance.sigma,
            x_c=x[0],
            y_c=x[1],
            L_x=x[2],
            L_y=x[3],
            x0_pred_xc=plan.x0[0],
            x0_pred_yc=plan.x0[1],
            x0_pred_Lx=plan.x0[2],
            x0_pred_Ly=plan.x0[3],
            k_x=true_terr.k_x,
            k_y=true_terr.k_y,
            mu_eff=sf * true_terr.mu,
            vx_cmd=cmd.v_x_des,
            ufp_x=ufp_applied[0],
            ufp_y=ufp_applied[1],
            slip_bound_x=sb_x,
            slip_bound_y=sb_y,
            qp_status=plan.solution.status,
            qp_iters=plan.solution.iterations,
            solve_time_s=wall if scenario.record_timing else 0.0,
        )
        log.solve_time_wall.append(wall)
        fallback_flags.append(plan.fallback)

        if scenario.hard_fail_on_slip and (
            abs(x[0]) > sb_x or abs(x[1]) > sb_y
        ):
            return terminate(
                Event(
                    EVENT_SLIP,
                    t,
                    f"hard fail: |CoM offset| exceeded the slip bound at t={t:.3f}",
                    log.n_rows - 1,
                )
            )

        if i < n_ticks:
            try:
                x = plant.advance_tick(x, t)
            except SingularGeometryError as exc:
                return terminate(Event(EVENT_PLANT_SINGULAR, t, str(exc), log.n_rows - 1))

    return _finalize(log, scenario, fallback_flags)


def _finalize(log: SimLog, scenario: Scenario, fallback_flags: list[bool]) -> SimLog:
    known = {(e.kind, e.sample_index) for e in log.events}
    for ev in detect_events(log, scenario.mpc.workspace):
        if (ev.kind, ev.sample_index) not in known:
            log.events.append(ev)
    log.events.sort(key=lambda e: (e.t, e.kind))
    return log


def detect_events(log: SimLog, workspace: WorkspaceConfig) -> list[Event]:
    """Scan a log for violations of the bounds it records.

    Emits one event per violation episode: slip when a CoM offset exceeds
    the logged slip bound, mech when it leaves the stance-dependent box,
    qp-infeasible when the solver status degrades.
    """
    events: list[Event] = []
    in_slip = in_mech = in_qp = False
    for r in range(log.n_rows):
        x_c = log.col("x_c")[r]
        y_c = log.col("y_c")[r]
        stance = StanceSide(log.col("stance")[r])
        slip = (
            abs(x_c) > log.col("slip_bound_x")[r]
            or abs(y_c) > log.col("slip_bound_y")[r]
        )
        x_box = workspace.x_c_bounds
        y_box = workspace.y_c_bounds(stance)
        mech = not (x_box.lo <= x_c <= x_box.hi and y_box.lo <= y_c <= y_box.hi)
        qp_bad = log.col("qp_status")[r] != STATUS_OPTIMAL
        t = log.col("t")[r]
        if slip and not in_slip:
            events.append(
                Event(
                    EVENT_SLIP,
                    t,
                    f"CoM offset ({x_c:.4f}, {y_c:.4f}) outside slip bounds "
                    f"({log.col('slip_bound_x')[r]:.4f}, {log.col('slip_bound_y')[r]:.4f})",
                    r,
                )
            )
        if mech and not in_mech:
            events.append(
                Event(
                    EVENT_MECH,
                    t,
                    f"CoM offset ({x_c:.4f}, {y_c:.4f}) outside the mechanical box",
                    r,
                )
            )
        if qp_bad and not in_qp:
            events.append(
                Event(EVENT_QP_INFEASIBLE, t, log.col("qp_status")[r], r)
            )
        in_slip, in_mech, in_qp = slip, mech, qp_bad
    return events
