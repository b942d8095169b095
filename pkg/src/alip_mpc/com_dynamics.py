"""Exact nonlinear CoM dynamics used to validate the reduced model.

With the CoM height slaved to the ground plane, the exact momentum-form
dynamics couple the two horizontal directions through the term
``w = x_c*dy_c - y_c*dx_c``, which also equals ``(L_z - Lc_z)/m``.  Because
``w`` contains the unknown velocities, the velocity equations are implicit;
they reduce to a single scalar solve::

    w * z_c / z_H = x_c*a2 - y_c*a1,   z_c = k_x*x_c + k_y*y_c + z_H

where ``a1, a2`` are the momentum-driven velocity terms.  The system is
singular exactly when the CoM sits on the line z_c = 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from .errors import InvalidParameterError, SingularGeometryError
from .model import (
    CentroidalMomentum,
    ComState,
    RobotParams,
    TerrainPlane,
    ZERO_CENTROIDAL,
    build_alip_matrix,
)

__all__ = ["Variant", "com_dynamics_rhs", "integrate_com", "ComTrajectory"]

Variant = Literal["alip", "exact-pre", "exact-post"]

_SINGULARITY_REL_TOL = 1e-12

LcProfile = Callable[[float], CentroidalMomentum]


def _rhs_array(
    x: np.ndarray,
    Lc: CentroidalMomentum,
    params: RobotParams,
    terrain: TerrainPlane,
    variant: Variant,
) -> np.ndarray:
    m, g = params.m, params.g
    z_H = terrain.z_H
    x_c, y_c, L_x, L_y = x

    if variant == "alip":
        mzH = m * z_H
        return np.array(
            [L_y / mzH, -L_x / mzH, -m * g * y_c, m * g * x_c]
        )

    a1 = (L_y - Lc.Lc_y) / (m * z_H)
    a2 = (-L_x + Lc.Lc_x) / (m * z_H)
    z_c = terrain.k_x * x_c + terrain.k_y * y_c + z_H
    # z_c > 0 is a state invariant; the implicit system is singular on the
    # line z_c = 0, so the whole non-positive region is rejected.
    if z_c <= _SINGULARITY_REL_TOL * z_H:
        raise SingularGeometryError(
            f"CoM on or past the degenerate slope line: z_c = {z_c:.3e} at "
            f"(x_c={x_c}, y_c={y_c})"
        )
    w = (x_c * a2 - y_c * a1) * z_H / z_c

    if variant == "exact-pre":
        dx = a1 + terrain.k_y * w / z_H
        dy = a2 - terrain.k_x * w / z_H
    elif variant == "exact-post":
        # Same value through the momentum route: L_z - Lc_z = m*w.
        Lz_rel = m * w
        dx = a1 + terrain.k_y * Lz_rel / (m * z_H)
        dy = a2 - terrain.k_x * Lz_rel / (m * z_H)
    else:
        raise InvalidParameterError(f"unknown dynamics variant {variant!r}")
    return np.array([dx, dy, -m * g * y_c, m * g * x_c])


def com_dynamics_rhs(
    state: ComState,
    Lc: CentroidalMomentum,
    params: RobotParams,
    terrain: TerrainPlane,
    variant: Variant = "exact-pre",
) -> np.ndarray:
    """Time derivative of (x_c, y_c, L_x, L_y) for the chosen model variant."""
    return _rhs_array(state.as_array(), Lc, params, terrain, variant)


@dataclass(frozen=True)
class ComTrajectory:
    """Fixed-step integration output: times (N+1,) and states (N+1, 4)."""

    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_com(
    x0: ComState,
    Lc_profile: Optional[LcProfile],
    params: RobotParams,
    terrain: TerrainPlane,
    T: float,
    h: float = 1e-3,
    variant: Variant = "exact-pre",
) -> ComTrajectory:
    """Classical 4th-order fixed-step integration of the CoM dynamics.

    Samples at t = 0, h, 2h, ..., T; T must be an integer number of steps.
    """
    if T <= 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    if h <= 0 or h > T:
        raise InvalidParameterError(f"h must satisfy 0 < h <= T, got {h}")
    n = int(round(T / h))
    if abs(n * h - T) > 1e-9 * max(1.0, T):
        raise InvalidParameterError(
            f"T = {T} is not an integer multiple of h = {h}"
        )

    lc = Lc_profile if Lc_profile is not None else (lambda t: ZERO_CENTROIDAL)
    times = np.arange(n + 1) * h
    states = np.empty((n + 1, 4))
    x = x0.as_array()
    states[0] = x
    for i in range(n):
        t = i * h
        k1 = _rhs_array(x, lc(t), params, terrain, variant)
        k2 = _rhs_array(x + 0.5 * h * k1, lc(t + 0.5 * h), params, terrain, variant)
        k3 = _rhs_array(x + 0.5 * h * k2, lc(t + 0.5 * h), params, terrain, variant)
        k4 = _rhs_array(x + h * k3, lc(t + h), params, terrain, variant)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[i + 1] = x
    return ComTrajectory(times=times, states=states)
