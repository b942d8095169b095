"""Terminal cost synthesis via the discrete-time algebraic Riccati equation.

The step-to-step error dynamics are x+ = A_d x + B_d u with A_d the
closed-form transition over one step period and B_d = A_d B (placement
applied just before the step propagates).  The terminal weight is the
fixed point of the Riccati recursion for these dynamics; a lifted two-step
variant accumulating cost at both impacts is provided for comparison.
"""
from __future__ import annotations

from typing import Literal

import numpy as np

from .errors import InvalidParameterError, RiccatiDivergenceError
from .model import IMPACT_INPUT_MATRIX, RobotParams, TerrainPlane, step_transition

__all__ = ["dare_terminal_cost", "step_dynamics_pair", "riccati_fixed_point"]

DareMode = Literal["one-step", "two-step-lifted"]


def step_dynamics_pair(
    params: RobotParams, terrain: TerrainPlane
) -> tuple[np.ndarray, np.ndarray]:
    """Discrete pair (A_d, B_d) of the step-to-step placement dynamics."""
    A_d = step_transition(params, terrain, params.T_s)
    return A_d, A_d @ IMPACT_INPUT_MATRIX


def riccati_fixed_point(
    A: np.ndarray,
    B: np.ndarray,
    Q: np.ndarray,
    R: np.ndarray,
    N: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Iterate the Riccati recursion from P = 0 until the update stalls.

    Supports a state-input cross term N for the lifted two-step mode.
    """
    nx = A.shape[0]
    if N is None:
        N = np.zeros((nx, B.shape[1]))
    P = np.zeros((nx, nx))
    for _ in range(max_iter):
        S = N + A.T @ P @ B
        M = R + B.T @ P @ B
        P_next = Q + A.T @ P @ A - S @ np.linalg.solve(M, S.T)
        P_next = 0.5 * (P_next + P_next.T)
        if np.max(np.abs(P_next - P)) <= tol:
            return P_next
        if not np.all(np.isfinite(P_next)):
            raise RiccatiDivergenceError("Riccati iteration produced non-finite values")
        P = P_next
    raise RiccatiDivergenceError(
        f"Riccati iteration did not converge within {max_iter} iterations"
    )


def _dare_matrices(
    params: RobotParams,
    terrain: TerrainPlane,
    Q_step: np.ndarray,
    mode: DareMode,
    regularization: float,
):
    Q = np.asarray(Q_step, dtype=float)
    if Q.shape != (4, 4):
        raise InvalidParameterError(f"Q_step must be 4x4, got {Q.shape}")
    if not np.allclose(Q, Q.T, atol=1e-12):
        raise InvalidParameterError("Q_step must be symmetric")
    A_d, B_d = step_dynamics_pair(params, terrain)
    R = regularization * np.eye(2)
    if mode == "one-step":
        return A_d, B_d, Q, R, None
    if mode != "two-step-lifted":
        raise InvalidParameterError(f"unknown DARE mode {mode!r}")
    # Two-step block: x2 = A_d^2 x + [A_d^2 B, A_d B] [u0; u1], with stage
    # cost Q charged at the mid impact x1 = A_d x + B_d u0 and at x2.
    A2 = A_d @ A_d
    B2 = np.hstack([A_d @ B_d, B_d])
    E0 = np.hstack([np.eye(2), np.zeros((2, 2))])  # selects u0 from [u0; u1]
    mid_u = B_d @ E0  # x1 input part
    Q_l = A_d.T @ Q @ A_d + A2.T @ Q @ A2
    N_l = A_d.T @ Q @ mid_u + A2.T @ Q @ B2
    R_l = mid_u.T @ Q @ mid_u + B2.T @ Q @ B2 + np.kron(np.eye(2), R)
    return A2, B2, Q_l, R_l, N_l


def dare_terminal_cost(
    params: RobotParams,
    terrain: TerrainPlane,
    Q_step: np.ndarray,
    mode: DareMode = "one-step",
    regularization: float = 1e-9,
    tol: float = 1e-10,
) -> np.ndarray:
    """Optimal cost-to-go matrix used as the horizon terminal weight."""
    A, B, Q, R, N = _dare_matrices(params, terrain, Q_step, mode, regularization)
    return riccati_fixed_point(A, B, Q, R, N=N, tol=tol)


def dare_residual(
    params: RobotParams,
    terrain: TerrainPlane,
    Q_step: np.ndarray,
    P: np.ndarray,
    mode: DareMode = "one-step",
    regularization: float = 1e-9,
) -> float:
    """Fixed-point defect of P under one more Riccati application."""
    A, B, Q, R, N = _dare_matrices(params, terrain, Q_step, mode, regularization)
    if N is None:
        N = np.zeros((A.shape[0], B.shape[1]))
    S = N + A.T @ P @ B
    P_next = Q + A.T @ P @ A - S @ np.linalg.solve(R + B.T @ P @ B, S.T)
    return float(np.abs(P_next - P).max())
