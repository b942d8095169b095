"""Reduced-order model of walking: pendulum state, linear flow, impact map.

The model state is ``(x_c, y_c, L_x, L_y)``: CoM position relative to the
stance contact point and angular momenta about that contact.  With the CoM
constrained to move parallel to the local ground plane the continuous
dynamics are linear and split into a sagittal pair ``(x_c, L_y)`` and a
frontal pair ``(y_c, L_x)``, each a saddle with natural frequency
``sqrt(g / z_H)``.  Foot placement acts step-to-step through an
instantaneous change of contact point that leaves both momenta unchanged.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "AlipState",
    "ComState",
    "CentroidalMomentum",
    "RobotParams",
    "TerrainPlane",
    "StanceSide",
    "IMPACT_INPUT_MATRIX",
    "build_alip_matrix",
    "step_transition",
    "expm_oracle",
    "apply_impact",
    "predict_to_impact",
]


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidParameterError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class RobotParams:
    """Mass, gravity, step period and nominal step width."""

    m: float = 32.0
    g: float = 9.81
    T_s: float = 0.3
    W: float = 0.3

    def __post_init__(self) -> None:
        _require_finite("RobotParams", self.m, self.g, self.T_s, self.W)
        if self.m <= 0 or self.g <= 0 or self.T_s <= 0:
            raise InvalidParameterError(
                f"m, g, T_s must be positive (m={self.m}, g={self.g}, T_s={self.T_s})"
            )
        if self.W < 0:
            raise InvalidParameterError(f"step width W must be >= 0, got {self.W}")


@dataclass(frozen=True)
class TerrainPlane:
    """Local planar terrain: slopes tan(alpha), friction, CoM height."""

    k_x: float = 0.0
    k_y: float = 0.0
    mu: float = 0.6
    z_H: float = 0.8

    def __post_init__(self) -> None:
        _require_finite("TerrainPlane", self.k_x, self.k_y, self.mu, self.z_H)
        if self.z_H <= 0:
            raise InvalidParameterError(f"z_H must be positive, got {self.z_H}")
        if self.mu < 0:
            raise InvalidParameterError(f"mu must be >= 0, got {self.mu}")

    def flattened(self) -> "TerrainPlane":
        """Same terrain with slopes zeroed (a slope-blind controller's belief)."""
        return TerrainPlane(0.0, 0.0, self.mu, self.z_H)


class StanceSide(enum.IntEnum):
    """Which foot is on the ground; the sign enters lateral references."""

    LEFT = 1
    RIGHT = -1

    @property
    def sigma(self) -> int:
        return int(self.value)

    @property
    def other(self) -> "StanceSide":
        return StanceSide.RIGHT if self is StanceSide.LEFT else StanceSide.LEFT


@dataclass(frozen=True)
class AlipState:
    """Pendulum state (x_c, y_c, L_x, L_y); ordering is fixed everywhere."""

    x_c: float
    y_c: float
    L_x: float
    L_y: float

    def __post_init__(self) -> None:
        _require_finite("AlipState", self.x_c, self.y_c, self.L_x, self.L_y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_c, self.y_c, self.L_x, self.L_y], dtype=float)

    @classmethod
    def from_array(cls, x: np.ndarray) -> "AlipState":
        x = np.asarray(x, dtype=float).reshape(4)
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


@dataclass(frozen=True)
class ComState(AlipState):
    """CoM state for the exact dynamics; z_c is slaved to the height constraint."""

    def com_height(self, terrain: TerrainPlane) -> float:
        """z_c recovered from the planar height constraint; must stay positive."""
        return terrain.k_x * self.x_c + terrain.k_y * self.y_c + terrain.z_H


@dataclass(frozen=True)
class CentroidalMomentum:
    """Angular momentum about the CoM, supplied as an exogenous profile."""

    Lc_x: float = 0.0
    Lc_y: float = 0.0
    Lc_z: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("CentroidalMomentum", self.Lc_x, self.Lc_y, self.Lc_z)


ZERO_CENTROIDAL = CentroidalMomentum()

# Maps a foot placement (u_x, u_y) onto the state: positions shift to the new
# contact, momenta are conserved.
IMPACT_INPUT_MATRIX = np.array(
    [[-1.0, 0.0], [0.0, -1.0], [0.0, 0.0], [0.0, 0.0]], dtype=float
)


def natural_frequency_value(g: float, z_H: float) -> float:
    if g <= 0 or z_H <= 0:
        raise InvalidParameterError(f"g and z_H must be positive (g={g}, z_H={z_H})")
    return math.sqrt(g / z_H)


def build_alip_matrix(params: RobotParams, terrain: TerrainPlane) -> np.ndarray:
    """Continuous-time dynamics matrix of the reduced model.

    Two decoupled saddles: d(x_c)/dt = L_y/(m z_H), d(L_y)/dt = m g x_c, and
    the mirrored frontal pair with opposite signs.
    """
    m, g, z_H = params.m, params.g, terrain.z_H
    if m <= 0 or g <= 0 or z_H <= 0:
        raise InvalidParameterError(
            f"m, g, z_H must be positive (m={m}, g={g}, z_H={z_H})"
        )
    A = np.zeros((4, 4))
    A[0, 3] = 1.0 / (m * z_H)
    A[1, 2] = -1.0 / (m * z_H)
    A[2, 1] = -m * g
    A[3, 0] = m * g
    return A


def step_transition(params: RobotParams, terrain: TerrainPlane, dt: float) -> np.ndarray:
    """Closed-form state transition exp(A dt) of the reduced model.

    cosh on the diagonal, sinh couplings scaled by m z_H ell per 2x2 block.
    """
    if dt < 0:
        raise InvalidParameterError(f"dt must be >= 0, got {dt}")
    m, z_H = params.m, terrain.z_H
    ell = natural_frequency_value(params.g, z_H)
    c = math.cosh(ell * dt)
    s = math.sinh(ell * dt)
    mzl = m * z_H * ell
    return np.array(
        [
            [c, 0.0, 0.0, s / mzl],
            [0.0, c, -s / mzl, 0.0],
            [0.0, -mzl * s, c, 0.0],
            [mzl * s, 0.0, 0.0, c],
        ]
    )


def _balance(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal similarity scaling equalizing row/column norms (powers of 2)."""
    X = X.copy()
    n = X.shape[0]
    d = np.ones(n)
    for _ in range(30):
        converged = True
        for i in range(n):
            r = float(np.sum(np.abs(X[i, :])) - abs(X[i, i]))
            c = float(np.sum(np.abs(X[:, i])) - abs(X[i, i]))
            if r == 0.0 or c == 0.0:
                continue
            f = 1.0
            while c < 0.5 * r:
                c *= 2.0
                r *= 0.5
                f *= 2.0
            while c > 2.0 * r:
                c *= 0.5
                r *= 2.0
                f *= 0.5
            if f != 1.0:
                d[i] *= f
                X[:, i] *= f
                X[i, :] /= f
                converged = False
        if converged:
            break
    return X, d


def expm_oracle(M: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Matrix exponential exp(M t): balancing + scaling-and-squaring series.

    Independent of the closed-form transition; used to cross-check it.
    Balancing keeps roundoff amplification low for badly scaled matrices;
    relative accuracy is well under 1e-12 for ||M t|| (balanced) <= 10.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)) or not math.isfinite(t):
        raise InvalidParameterError("expm_oracle requires finite entries")
    n = M.shape[0]
    Xb, d = _balance(M * t)
    norm = np.linalg.norm(Xb, ord=np.inf)
    squarings = max(0, int(math.ceil(math.log2(norm))) if norm > 1.0 else 0)
    Xs = Xb / (2.0**squarings)
    term = np.eye(n)
    acc = np.eye(n)
    for k in range(1, 33):
        term = term @ Xs / k
        acc = acc + term
    for _ in range(squarings):
        acc = acc @ acc
    return (acc * d[:, None]) / d[None, :]


def apply_impact(x_minus: AlipState, u_fp: np.ndarray) -> AlipState:
    """State update across an instantaneous support exchange.

    The CoM offsets re-reference to the new contact at ``u_fp`` from the old
    one; angular momenta about the contact carry over unchanged.
    """
    u = np.asarray(u_fp, dtype=float).reshape(2)
    return AlipState(
        x_minus.x_c - u[0], x_minus.y_c - u[1], x_minus.L_x, x_minus.L_y
    )


def predict_to_impact(
    x_t: AlipState,
    time_remaining: float,
    params: RobotParams,
    terrain: TerrainPlane,
) -> AlipState:
    """Flow the measured state forward to just before the upcoming impact."""
    if time_remaining < 0 or time_remaining > params.T_s + 1e-12:
        raise InvalidParameterError(
            f"time_remaining must lie in [0, T_s={params.T_s}], got {time_remaining}"
        )
    Phi = step_transition(params, terrain, time_remaining)
    return AlipState.from_array(Phi @ x_t.as_array())
