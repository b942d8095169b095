"""HTTP service exposing the simulator and planner.

Scenario payloads are validated by the same strict schema the file loader
uses; responses carry CSV log content verbatim so clients writing it to
disk preserve byte-identical determinism.
"""
from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .dare import dare_residual, step_dynamics_pair
from .errors import InvalidParameterError, ScenarioError
from .model import AlipState, StanceSide
from .mpc import FootstepPlanner
from .scenario import Scenario, ScenarioModel
from .simlog import SimLog, log_csv_text
from .simulator import run_closed_loop

__all__ = ["create_app", "app"]


class EventOut(BaseModel):
    kind: str
    t: float
    detail: str
    sample_index: int


class RunSummary(BaseModel):
    name: str
    rows: int
    steps_completed: int
    truncated: bool
    terminal_event: Optional[EventOut] = None
    event_counts: dict[str, int]


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    scenario: ScenarioModel


class SimulateResponse(BaseModel):
    csv: str
    events: list[EventOut]
    summary: RunSummary


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    scenario: ScenarioModel
    horizons: list[int] = Field(min_length=1)


class SweepRun(BaseModel):
    horizon: int
    csv: str
    events: list[EventOut]
    summary: RunSummary


class SweepResponse(BaseModel):
    runs: list[SweepRun]


class PlanRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    scenario: ScenarioModel
    state: Optional[tuple[float, float, float, float]] = None
    time_remaining: Optional[float] = None
    stance: Optional[str] = None


class PlanResponse(BaseModel):
    u_first: tuple[float, float]
    u_sequence: list[tuple[float, float]]
    x0: tuple[float, float, float, float]
    predicted_impacts: list[tuple[float, float, float, float]]
    status: str
    iterations: int
    active_rows: list[str]
    violated_rows: list[str]
    kkt_residuals: dict[str, float]


class GainsResponse(BaseModel):
    A_d: list[list[float]]
    B_d: list[list[float]]
    Q_f: list[list[float]]
    dare_residual: float
    natural_frequency: float


def _summary(log: SimLog, name: str) -> RunSummary:
    counts: dict[str, int] = {}
    for e in log.events:
        counts[e.kind] = counts.get(e.kind, 0) + 1
    steps = int(log.col("step_index")[-1]) if log.n_rows else 0
    return RunSummary(
        name=name,
        rows=log.n_rows,
        steps_completed=steps,
        truncated=log.truncated,
        terminal_event=(
            EventOut(**log.terminal_event.__dict__) if log.terminal_event else None
        ),
        event_counts=counts,
    )


def _run(scenario: Scenario):
    log = run_closed_loop(scenario)
    return (
        log_csv_text(log),
        [EventOut(**e.__dict__) for e in log.events],
        _summary(log, scenario.name),
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="alip-mpc",
        version=__version__,
        description="Foot-placement MPC gait simulator",
    )

    def to_scenario(model: ScenarioModel) -> Scenario:
        try:
            return model.to_domain()
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        scenario = to_scenario(req.scenario)
        csv_text, events, summary = _run(scenario)
        return SimulateResponse(csv=csv_text, events=events, summary=summary)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        runs = []
        for h in req.horizons:
            if h < 1:
                raise HTTPException(status_code=422, detail=f"invalid horizon {h}")
            model = req.scenario.model_copy(deep=True)
            model.controller.N_s = h
            scenario = to_scenario(model)
            csv_text, events, summary = _run(scenario)
            runs.append(
                SweepRun(horizon=h, csv=csv_text, events=events, summary=summary)
            )
        return SweepResponse(runs=runs)

    @app.post("/plan", response_model=PlanResponse)
    def plan(req: PlanRequest) -> PlanResponse:
        scenario = to_scenario(req.scenario)
        terr = scenario.terrain_schedule[0][1]
        cmd = scenario.command_schedule[0][1]
        if req.state is not None:
            x_t = AlipState(*req.state)
        elif scenario.initial_state is not None:
            x_t = scenario.initial_state
        else:
            from .reference import orbit_post_impact_state, velocity_to_momentum

            L_y = velocity_to_momentum(cmd.v_x_des, scenario.robot, terr)
            x_t = orbit_post_impact_state(
                L_y, cmd, scenario.initial_stance, scenario.robot, terr
            )
        stance = scenario.initial_stance
        if req.stance is not None:
            if req.stance not in ("left", "right"):
                raise HTTPException(status_code=422, detail=f"invalid stance {req.stance!r}")
            stance = StanceSide.LEFT if req.stance == "left" else StanceSide.RIGHT
        t_rem = (
            req.time_remaining if req.time_remaining is not None else scenario.robot.T_s
        )
        believed = terr.flattened() if scenario.terrain_mode == "flat" else terr
        planner = FootstepPlanner(scenario.mpc, scenario.robot, believed)
        try:
            fp = planner.plan(x_t, t_rem, cmd, stance, believed)
        except InvalidParameterError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        geo = planner.geometry
        impacts = [
            tuple(fp.states[j * geo.N_dt]) for j in range(1, geo.N_s + 1)
        ]
        sol = fp.solution
        return PlanResponse(
            u_first=tuple(fp.u_first),
            u_sequence=[tuple(u) for u in fp.u_sequence],
            x0=tuple(fp.x0),
            predicted_impacts=impacts,
            status=sol.status,
            iterations=sol.iterations,
            active_rows=[fp.rows.describe_row(r) for r in sol.active],
            violated_rows=fp.violated_rows(),
            kkt_residuals={
                "primal": sol.primal_residual,
                "dual": sol.dual_residual,
                "complementarity": sol.comp_residual,
            },
        )

    @app.post("/gains", response_model=GainsResponse)
    def gains(req: SimulateRequest) -> GainsResponse:
        scenario = to_scenario(req.scenario)
        terr = scenario.terrain_schedule[0][1]
        planner = FootstepPlanner(scenario.mpc, scenario.robot, terr)
        A_d, B_d = step_dynamics_pair(scenario.robot, terr)
        P = planner.Q_f
        resid = dare_residual(
            scenario.robot,
            terr,
            scenario.mpc.Q_step,
            P,
            mode=scenario.mpc.dare_mode,
            regularization=scenario.mpc.regularization,
        )
        from .reference import natural_frequency

        return GainsResponse(
            A_d=A_d.tolist(),
            B_d=B_d.tolist(),
            Q_f=P.tolist(),
            dare_residual=resid,
            natural_frequency=natural_frequency(scenario.robot, terr),
        )

    return app


app = create_app()
