"""Condensed horizon geometry for the receding-horizon planner.

The predicted state at intra-step sample ``i`` is affine in the initial
pre-impact state and the stacked placements::

    x_i = Phi_i x0 + Gamma_i U,    U = [u_0; ...; u_{Ns-1}]

where placements apply at samples i = j*N_dt (start of each planned step)
and the state propagates by the closed-form transition over one sample
period otherwise.  Everything here depends only on controller geometry,
never on the measured state, so it is computed once and reused each tick.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .model import IMPACT_INPUT_MATRIX, RobotParams, StanceSide, TerrainPlane, step_transition

__all__ = ["HorizonGeometry", "build_horizon"]


@dataclass(frozen=True)
class HorizonGeometry:
    """Affine sample maps for one (N_s, N_dt) horizon."""

    N_s: int
    N_dt: int
    dt: float
    A_dt: np.ndarray          # (4, 4) one-sample transition
    Phi: np.ndarray           # (N+1, 4, 4), Phi[i] maps x0 -> x_i
    Gamma: np.ndarray         # (N+1, 4, 2*N_s), Gamma[i] maps U -> x_i
    impact_samples: np.ndarray = field(repr=False, default=None)  # (N_s,), sample j*N_dt

    @property
    def n_samples(self) -> int:
        return self.N_s * self.N_dt

    @property
    def n_vars(self) -> int:
        return 2 * self.N_s

    def predict(self, x0: np.ndarray, U: np.ndarray) -> np.ndarray:
        """All predicted states (N+1, 4) for a given x0 and placement stack."""
        return self.Phi @ x0 + self.Gamma @ U

    def step_of_sample(self, i: int) -> int:
        """Planned-step index (1-based) whose stance governs sample i >= 1."""
        return (i - 1) // self.N_dt + 1

    def stance_of_step(self, j: int, current: StanceSide) -> StanceSide:
        """Stance during planned step j (step 0 is the one in progress)."""
        return current if j % 2 == 0 else current.other


def build_horizon(
    params: RobotParams,
    terrain: TerrainPlane,
    N_s: int,
    N_dt: int,
) -> HorizonGeometry:
    if N_s < 1 or N_dt < 1:
        raise InvalidParameterError(f"N_s and N_dt must be >= 1 (got {N_s}, {N_dt})")
    dt = params.T_s / N_dt
    A_dt = step_transition(params, terrain, dt)
    N = N_s * N_dt
    n = 2 * N_s
    Phi = np.empty((N + 1, 4, 4))
    Gamma = np.zeros((N + 1, 4, n))
    Phi[0] = np.eye(4)
    B = IMPACT_INPUT_MATRIX
    for i in range(N):
        Phi[i + 1] = A_dt @ Phi[i]
        Gamma[i + 1] = A_dt @ Gamma[i]
        if i % N_dt == 0:
            j = i // N_dt
            Gamma[i + 1, :, 2 * j : 2 * j + 2] += A_dt @ B
    impacts = np.arange(N_s) * N_dt
    return HorizonGeometry(
        N_s=N_s, N_dt=N_dt, dt=dt, A_dt=A_dt, Phi=Phi, Gamma=Gamma,
        impact_samples=impacts,
    )
