"""Scenario files: strict schema, validation and domain conversion.

A scenario is a YAML document (schema_version 1) holding the robot
parameters, piecewise-constant terrain and command schedules, controller
and plant configuration, and run controls.  Unknown keys are rejected;
schedules must be sorted with the first entry at t = 0; the duration must
be a whole number of steps and the controller/plant periods must nest into
the step period.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .constraints import Interval, MU_SAFETY_DEFAULT, WorkspaceConfig
from .errors import ScenarioError
from .model import AlipState, RobotParams, StanceSide, TerrainPlane
from .mpc import MpcConfig
from .reference import GaitCommand

__all__ = ["Scenario", "ScenarioModel", "load_scenario", "scenario_from_dict"]

SCHEMA_VERSION = 1
_GRID_TOL = 1e-9


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RobotModel(_Strict):
    m: float = 32.0
    g: float = 9.81
    T_s: float = 0.3
    W: float = 0.3


class TerrainEntry(_Strict):
    t_start: float = 0.0
    k_x: float = 0.0
    k_y: float = 0.0
    mu: float = 0.6
    z_H: float = 0.8


class CommandEntry(_Strict):
    t_start: float = 0.0
    v_x: float = 0.0
    Lx_offset: float = 0.0
    delta_psi: float = 0.0
    W: Optional[float] = None  # defaults to the robot's nominal width


class WorkspaceModel(_Strict):
    x_c: tuple[float, float] = (-0.5, 0.5)
    y_c_left: tuple[float, float] = (-0.35, -0.04)
    u_x: tuple[float, float] = (-0.6, 0.6)
    u_y_left: tuple[float, float] = (-0.45, -0.10)
    mu_safety_factor: float = MU_SAFETY_DEFAULT
    margin: float = 0.002

    def to_domain(self) -> WorkspaceConfig:
        return WorkspaceConfig(
            x_c_bounds=Interval(*self.x_c),
            y_c_bounds_left=Interval(*self.y_c_left),
            u_x_bounds=Interval(*self.u_x),
            u_y_bounds_left=Interval(*self.u_y_left),
            mu_safety_factor=self.mu_safety_factor,
            margin=self.margin,
        )


class ControllerModel(_Strict):
    N_s: int = 4
    N_dt: int = 30
    period: float = 0.004
    Q_step: tuple[float, float, float, float] = (1.0, 1.0, 0.05, 0.05)
    regularization: float = 1e-9
    dare_mode: Literal["one-step", "two-step-lifted"] = "one-step"
    terrain_mode: Literal["true_terrain", "flat"] = "true_terrain"
    preview: bool = True
    allow_fallback: bool = True
    workspace: WorkspaceModel = Field(default_factory=WorkspaceModel)


class PlantModel(_Strict):
    kind: Literal["alip", "exact-pre"] = "alip"
    step: float = 1e-3
    Lc_amplitude: float = 0.0
    Lc_frequency: float = 1.0


class InitialModel(_Strict):
    state: Literal["orbit"] | tuple[float, float, float, float] = "orbit"
    stance: Literal["left", "right"] = "left"


class ScenarioModel(_Strict):
    schema_version: int = SCHEMA_VERSION
    name: str = ""
    robot: RobotModel = Field(default_factory=RobotModel)
    duration: float
    terrain: list[TerrainEntry] = Field(default_factory=lambda: [TerrainEntry()])
    commands: list[CommandEntry] = Field(default_factory=lambda: [CommandEntry()])
    controller: ControllerModel = Field(default_factory=ControllerModel)
    plant: PlantModel = Field(default_factory=PlantModel)
    initial: InitialModel = Field(default_factory=InitialModel)
    seed: int = 0
    hard_fail_on_slip: bool = False
    record_timing: bool = False

    def to_domain(self) -> "Scenario":
        if self.schema_version != SCHEMA_VERSION:
            raise ScenarioError(
                f"unsupported schema_version {self.schema_version}; expected {SCHEMA_VERSION}"
            )
        robot = RobotParams(m=self.robot.m, g=self.robot.g, T_s=self.robot.T_s, W=self.robot.W)

        def check_schedule(entries, label):
            if not entries:
                raise ScenarioError(f"{label} schedule must have at least one entry")
            if abs(entries[0].t_start) > _GRID_TOL:
                raise ScenarioError(f"first {label} entry must start at t = 0")
            starts = [e.t_start for e in entries]
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise ScenarioError(f"{label} schedule must be strictly sorted by t_start")

        check_schedule(self.terrain, "terrain")
        check_schedule(self.commands, "command")

        terrain_schedule = [
            (e.t_start, TerrainPlane(k_x=e.k_x, k_y=e.k_y, mu=e.mu, z_H=e.z_H))
            for e in self.terrain
        ]
        z_heights = {t.z_H for _, t in terrain_schedule}
        if len(z_heights) != 1:
            raise ScenarioError("z_H must stay constant across the terrain schedule")
        command_schedule = [
            (
                e.t_start,
                GaitCommand(
                    v_x_des=e.v_x,
                    Lx_offset=e.Lx_offset,
                    delta_psi=e.delta_psi,
                    W=e.W if e.W is not None else robot.W,
                ),
            )
            for e in self.commands
        ]

        n_steps = self.duration / robot.T_s
        if self.duration <= 0 or abs(n_steps - round(n_steps)) > _GRID_TOL:
            raise ScenarioError(
                f"duration {self.duration} must be a positive multiple of T_s = {robot.T_s}"
            )
        ticks = robot.T_s / self.controller.period
        if abs(ticks - round(ticks)) > _GRID_TOL or self.controller.period <= 0:
            raise ScenarioError(
                f"controller period {self.controller.period} must divide T_s = {robot.T_s}"
            )
        sub = self.controller.period / self.plant.step
        if abs(sub - round(sub)) > _GRID_TOL or self.plant.step <= 0:
            raise ScenarioError(
                f"plant step {self.plant.step} must divide the controller period"
            )

        ctrl = self.controller
        mpc = MpcConfig(
            N_s=ctrl.N_s,
            N_dt=ctrl.N_dt,
            Q_step=np.diag(ctrl.Q_step),
            workspace=ctrl.workspace.to_domain(),
            regularization=ctrl.regularization,
            dare_mode=ctrl.dare_mode,
        )
        initial_state = (
            None
            if self.initial.state == "orbit"
            else AlipState(*self.initial.state)
        )
        return Scenario(
            name=self.name,
            robot=robot,
            duration=self.duration,
            terrain_schedule=terrain_schedule,
            command_schedule=command_schedule,
            mpc=mpc,
            controller_period=ctrl.period,
            terrain_mode=ctrl.terrain_mode,
            preview=ctrl.preview,
            allow_fallback=ctrl.allow_fallback,
            plant_kind=self.plant.kind,
            plant_step=self.plant.step,
            Lc_amplitude=self.plant.Lc_amplitude,
            Lc_frequency=self.plant.Lc_frequency,
            initial_state=initial_state,
            initial_stance=(
                StanceSide.LEFT if self.initial.stance == "left" else StanceSide.RIGHT
            ),
            seed=self.seed,
            hard_fail_on_slip=self.hard_fail_on_slip,
            record_timing=self.record_timing,
        )


@dataclass
class Scenario:
    """Validated, simulation-ready scenario."""

    robot: RobotParams
    duration: float
    terrain_schedule: list[tuple[float, TerrainPlane]]
    command_schedule: list[tuple[float, GaitCommand]]
    mpc: MpcConfig
    controller_period: float = 0.004
    terrain_mode: str = "true_terrain"
    preview: bool = True
    allow_fallback: bool = True
    plant_kind: str = "alip"
    plant_step: float = 1e-3
    Lc_amplitude: float = 0.0
    Lc_frequency: float = 1.0
    initial_state: Optional[AlipState] = None
    initial_stance: StanceSide = StanceSide.LEFT
    seed: int = 0
    hard_fail_on_slip: bool = False
    record_timing: bool = False
    name: str = ""

    def terrain_at(self, t: float) -> TerrainPlane:
        return _active(self.terrain_schedule, t)

    def command_at(self, t: float) -> GaitCommand:
        return _active(self.command_schedule, t)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.robot.T_s))


def _active(schedule, t):
    starts = [s for s, _ in schedule]
    idx = bisect.bisect_right(starts, t + _GRID_TOL) - 1
    return schedule[max(idx, 0)][1]


def scenario_from_dict(data: dict) -> Scenario:
    """Validate a raw mapping against the schema and build the scenario."""
    try:
        model = ScenarioModel.model_validate(data)
    except ValidationError as exc:
        lines = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in exc.errors()
        ]
        raise ScenarioError("invalid scenario:\n  " + "\n  ".join(lines)) from exc
    return model.to_domain()


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario file must hold a mapping")
    return scenario_from_dict(data)
