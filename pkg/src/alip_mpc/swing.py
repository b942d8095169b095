"""Kinematic reference trajectories realizing a foot placement.

Nine regulated outputs per step: torso pitch/roll pinned to zero, hip yaws
blending linearly toward half the commanded turn, CoM height held at z_H
above the inclined ground, swing-foot x/y on cosine blends from their
step-start values to the placement target, swing-foot z on a parabola
through a user-set clearance point, and the swing toe pitch aligned with
the terrain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError
from .model import TerrainPlane

__all__ = [
    "OutputInit",
    "SwingTargets",
    "PhaseValue",
    "phase",
    "parabola_coeffs",
    "reference_outputs",
    "com_height_output",
    "swing_z_target",
]


@dataclass(frozen=True)
class OutputInit:
    """Values of the nine outputs at the start of the step."""

    torso_pitch: float = 0.0
    torso_roll: float = 0.0
    stance_hip_yaw: float = 0.0
    swing_hip_yaw: float = 0.0
    com_height: float = 0.8
    swing_x: float = 0.0
    swing_y: float = 0.0
    swing_z: float = 0.0
    swing_toe_pitch: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.torso_pitch,
                self.torso_roll,
                self.stance_hip_yaw,
                self.swing_hip_yaw,
                self.com_height,
                self.swing_x,
                self.swing_y,
                self.swing_z,
                self.swing_toe_pitch,
            ]
        )


@dataclass(frozen=True)
class SwingTargets:
    """End-of-step targets: placement from the planner, height from slopes."""

    p_des_x: float
    p_des_y: float
    p_des_z: float
    delta_psi: float = 0.0
    z_H: float = 0.8
    k_x: float = 0.0
    s_clearance: float = 0.5
    z_clearance: float = 0.15

    def __post_init__(self) -> None:
        if not (0.0 < self.s_clearance < 1.0):
            raise InvalidParameterError(
                f"clearance phase must lie strictly in (0, 1), got {self.s_clearance}"
            )


class PhaseValue(NamedTuple):
    s: float
    clamped: bool


def phase(t_since_impact: float, T_s: float) -> PhaseValue:
    """Normalized time within the step, clamped to [0, 1] with a flag."""
    if T_s <= 0:
        raise InvalidParameterError(f"T_s must be positive, got {T_s}")
    s = t_since_impact / T_s
    if s < 0.0:
        return PhaseValue(0.0, True)
    if s > 1.0:
        return PhaseValue(1.0, True)
    return PhaseValue(s, False)


def parabola_coeffs(
    z_init: float, z_final: float, s_cl: float, z_cl: float
) -> tuple[float, float, float]:
    """Coefficients (b1, b2, b3) of z(s) = b1 s^2 + b2 s + b3 through
    (0, z_init), (1, z_final) and the clearance knot (s_cl, z_cl)."""
    if not (0.0 < s_cl < 1.0):
        raise InvalidParameterError(
            f"clearance phase must lie strictly in (0, 1), got {s_cl}"
        )
    M = np.array(
        [
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [s_cl * s_cl, s_cl, 1.0],
        ]
    )
    b = np.linalg.solve(M, np.array([z_init, z_final, z_cl]))
    return (float(b[0]), float(b[1]), float(b[2]))


def reference_outputs(
    s: float, init: OutputInit, targets: SwingTargets
) -> np.ndarray:
    """The nine reference outputs at phase s in [0, 1]."""
    if not (0.0 <= s <= 1.0):
        raise InvalidParameterError(f"phase must lie in [0, 1], got {s}")
    half_turn = 0.5 * targets.delta_psi
    blend_out = 0.5 * (1.0 + math.cos(math.pi * s))  # 1 at s=0, 0 at s=1
    blend_in = 1.0 - blend_out
    b1, b2, b3 = parabola_coeffs(
        init.swing_z, targets.p_des_z, targets.s_clearance, targets.z_clearance
    )
    return np.array(
        [
            0.0,
            0.0,
            (1.0 - s) * init.stance_hip_yaw - s * half_turn,
            (1.0 - s) * init.swing_hip_yaw + s * half_turn,
            targets.z_H,
            blend_out * init.swing_x + blend_in * targets.p_des_x,
            blend_out * init.swing_y + blend_in * targets.p_des_y,
            b1 * s * s + b2 * s + b3,
            targets.k_x,
        ]
    )


def com_height_output(p_stance_to_com: np.ndarray, terrain: TerrainPlane) -> float:
    """Height of the CoM above its projection onto the inclined ground."""
    p = np.asarray(p_stance_to_com, dtype=float).reshape(3)
    return float(p[2] - terrain.k_x * p[0] - terrain.k_y * p[1])


def swing_z_target(u_fp: np.ndarray, terrain: TerrainPlane) -> float:
    """Landing height of the placement on the local plane."""
    u = np.asarray(u_fp, dtype=float).reshape(2)
    return float(terrain.k_x * u[0] + terrain.k_y * u[1])
