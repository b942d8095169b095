"""Desired periodic impact states and operator-command mappings.

A two-step periodic gait alternates left/right stance.  The desired state
just before each impact follows from imposing momentum conservation across
the impact and period-2 closure on the closed-form pendulum flow; the
lateral components carry the stance sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .model import (
    AlipState,
    RobotParams,
    StanceSide,
    TerrainPlane,
    natural_frequency_value,
)

__all__ = [
    "GaitCommand",
    "DesiredImpactState",
    "natural_frequency",
    "velocity_to_momentum",
    "desired_impact_state",
    "stance_schedule",
    "periodic_foot_placement",
    "orbit_post_impact_state",
    "lateral_velocity_to_momentum_offset",
]


@dataclass(frozen=True)
class GaitCommand:
    """Operator-level gait targets."""

    v_x_des: float = 0.0
    Lx_offset: float = 0.0
    delta_psi: float = 0.0
    W: float = 0.3

    def __post_init__(self) -> None:
        for v in (self.v_x_des, self.Lx_offset, self.delta_psi, self.W):
            if not math.isfinite(v):
                raise InvalidParameterError(f"GaitCommand fields must be finite: {self}")
        if self.W < 0:
            raise InvalidParameterError(f"step width W must be >= 0, got {self.W}")


@dataclass(frozen=True)
class DesiredImpactState:
    """Desired pre-impact state together with the stance it belongs to."""

    state: AlipState
    stance: StanceSide


def natural_frequency(params: RobotParams, terrain: TerrainPlane) -> float:
    """Pendulum frequency ell = sqrt(g / z_H)."""
    return natural_frequency_value(params.g, terrain.z_H)


def velocity_to_momentum(
    v_x_des: float, params: RobotParams, terrain: TerrainPlane
) -> float:
    """Longitudinal velocity command -> angular momentum about the contact.

    For a CoM moving parallel to the ground with negligible centroidal
    momentum, L_y = m z_H v_x.
    """
    if not math.isfinite(v_x_des):
        raise InvalidParameterError(f"v_x_des must be finite, got {v_x_des}")
    return params.m * terrain.z_H * v_x_des


def desired_impact_state(
    L_y_des: float,
    cmd: GaitCommand,
    stance: StanceSide,
    params: RobotParams,
    terrain: TerrainPlane,
) -> DesiredImpactState:
    """Desired state just before the impact that ends a stance-side step."""
    m, z_H = params.m, terrain.z_H
    ell = natural_frequency(params, terrain)
    tau = math.tanh(0.5 * ell * params.T_s)
    sigma = stance.sigma
    state = AlipState(
        x_c=tau * L_y_des / (m * z_H * ell),
        y_c=-0.5 * sigma * cmd.W,
        L_x=0.5 * sigma * m * z_H * ell * cmd.W * tau + cmd.Lx_offset,
        L_y=L_y_des,
    )
    return DesiredImpactState(state=state, stance=stance)


def stance_schedule(step_index: int, initial: StanceSide) -> StanceSide:
    """Alternating stance: sigma(k) = sigma(0) * (-1)^k."""
    if step_index < 0:
        raise InvalidParameterError(f"step_index must be >= 0, got {step_index}")
    return initial if step_index % 2 == 0 else initial.other


def periodic_foot_placement(
    L_y_des: float,
    cmd: GaitCommand,
    stance: StanceSide,
    params: RobotParams,
    terrain: TerrainPlane,
) -> np.ndarray:
    """Foot placement that keeps the nominal orbit: applied at the end of a
    stance-side step, it maps the desired pre-impact state onto the next one."""
    m, z_H = params.m, terrain.z_H
    ell = natural_frequency(params, terrain)
    tau = math.tanh(0.5 * ell * params.T_s)
    return np.array(
        [2.0 * tau * L_y_des / (m * z_H * ell), -stance.sigma * cmd.W]
    )


def orbit_post_impact_state(
    L_y_des: float,
    cmd: GaitCommand,
    stance: StanceSide,
    params: RobotParams,
    terrain: TerrainPlane,
) -> AlipState:
    """State at the start of a stance-side step on the steady-state orbit.

    With a lateral momentum offset the commanded impact states are not
    exactly periodic; this is the steady state reached when the controller
    pins the momenta each step, which shifts the lateral position by
    tau * Lx_offset / (m z_H ell) and drifts sideways at a constant rate.
    """
    m, z_H = params.m, terrain.z_H
    ell = natural_frequency(params, terrain)
    tau = math.tanh(0.5 * ell * params.T_s)
    sigma = stance.sigma
    shift = tau * cmd.Lx_offset / (m * z_H * ell)
    return AlipState(
        x_c=-tau * L_y_des / (m * z_H * ell),
        y_c=-0.5 * sigma * cmd.W + shift,
        L_x=-0.5 * sigma * m * z_H * ell * cmd.W * tau + cmd.Lx_offset,
        L_y=L_y_des,
    )


def lateral_velocity_to_momentum_offset(
    v_y_des: float, params: RobotParams, terrain: TerrainPlane
) -> float:
    """Analytic lateral-speed -> Lx_offset mapping on the momentum-pinned orbit.

    Each step displaces the CoM by -2 tau Lx_offset / (m z_H ell), so the
    average lateral velocity is that divided by the step period.
    """
    if not math.isfinite(v_y_des):
        raise InvalidParameterError(f"v_y_des must be finite, got {v_y_des}")
    m, z_H = params.m, terrain.z_H
    ell = natural_frequency(params, terrain)
    tau = math.tanh(0.5 * ell * params.T_s)
    return -v_y_des * m * z_H * ell * params.T_s / (2.0 * tau)
