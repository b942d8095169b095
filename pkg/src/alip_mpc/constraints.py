"""Workspace and friction constraints as linear inequalities over placements.

The state constraint set combines mechanical boxes (leg workspace, with the
lateral interval mirrored between stance sides) and friction slip limits on
the CoM offset derived from a Coulomb cone on the slope-rotated ground
reaction force.  All rows are expressed over the condensed decision
variables, with the initial-state dependence kept symbolic so bounds can be
refreshed each control tick without rebuilding the rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError, DegenerateGeometryError, SlipBoundInfeasibleError
from .horizon import HorizonGeometry
from .model import StanceSide, TerrainPlane

__all__ = [
    "Interval",
    "WorkspaceConfig",
    "LinearInequalitySet",
    "slip_bound",
    "grf_ratios",
    "build_state_constraints",
    "build_input_constraints",
]

MU_SAFETY_DEFAULT = 1.0 / math.sqrt(2.0)

# Row provenance tags.
TAG_MECH_X = "mech-x"
TAG_MECH_Y = "mech-y"
TAG_SLIP_X = "slip-x"
TAG_SLIP_Y = "slip-y"
TAG_INPUT_X = "input-x"
TAG_INPUT_Y = "input-y"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidParameterError(f"interval bounds must be finite: {self}")
        if self.lo > self.hi:
            raise InvalidParameterError(f"empty interval [{self.lo}, {self.hi}]")

    def mirrored(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def shrunk(self, margin: float) -> "Interval":
        if 2.0 * margin > self.hi - self.lo:
            raise InvalidParameterError(
                f"margin {margin} empties interval [{self.lo}, {self.hi}]"
            )
        return Interval(self.lo + margin, self.hi - margin)

    def clamp(self, v: float) -> float:
        return min(max(v, self.lo), self.hi)


@dataclass(frozen=True)
class WorkspaceConfig:
    """Box limits for CoM offsets and foot placements.

    Lateral intervals are given for left stance; right stance uses the
    negation mirror so the swing foot never crosses the stance foot.
    ``margin`` shrinks the state boxes and slip bounds seen by the planner,
    leaving headroom for intra-sample excursions of the continuous plant.
    """

    x_c_bounds: Interval = Interval(-0.5, 0.5)
    y_c_bounds_left: Interval = Interval(-0.35, -0.04)
    u_x_bounds: Interval = Interval(-0.6, 0.6)
    u_y_bounds_left: Interval = Interval(-0.45, -0.10)
    mu_safety_factor: float = MU_SAFETY_DEFAULT
    margin: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.mu_safety_factor <= 1.0):
            raise InvalidParameterError(
                f"mu_safety_factor must lie in (0, 1], got {self.mu_safety_factor}"
            )
        if self.margin < 0:
            raise InvalidParameterError(f"margin must be >= 0, got {self.margin}")

    def y_c_bounds(self, stance: StanceSide) -> Interval:
        return self.y_c_bounds_left if stance is StanceSide.LEFT else self.y_c_bounds_left.mirrored()

    def u_y_bounds(self, stance: StanceSide) -> Interval:
        return self.u_y_bounds_left if stance is StanceSide.LEFT else self.u_y_bounds_left.mirrored()


@dataclass
class LinearInequalitySet:
    """Rows G U <= b0 + D x0 with provenance tags and sample indices.

    ``D`` carries the initial-state coupling of condensed state constraints;
    input rows have zero coupling.  ``samples`` holds the intra-step sample
    index a state row constrains, or -1 for input rows.
    """

    n_vars: int
    G: np.ndarray = None
    b0: np.ndarray = None
    D: np.ndarray = None
    tags: list[str] = field(default_factory=list)
    samples: np.ndarray = None

    def __post_init__(self) -> None:
        if self.G is None:
            self.G = np.zeros((0, self.n_vars))
            self.b0 = np.zeros(0)
            self.D = np.zeros((0, 4))
            self.samples = np.zeros(0, dtype=int)
        if not (np.all(np.isfinite(self.G)) and np.all(np.isfinite(self.b0))
                and np.all(np.isfinite(self.D))):
            raise InvalidParameterError("inequality rows must have finite coefficients")
        if len(self.tags) != self.G.shape[0]:
            raise InvalidParameterError("every inequality row needs a provenance tag")

    @property
    def n_rows(self) -> int:
        return self.G.shape[0]

    def upper_bounds(self, x0: np.ndarray) -> np.ndarray:
        """Effective right-hand sides for a given initial state."""
        return self.b0 + self.D @ np.asarray(x0, dtype=float)

    def concat(self, other: "LinearInequalitySet") -> "LinearInequalitySet":
        if other.n_vars != self.n_vars:
            raise InvalidParameterError("cannot concatenate over different variable spaces")
        return LinearInequalitySet(
            n_vars=self.n_vars,
            G=np.vstack([self.G, other.G]),
            b0=np.concatenate([self.b0, other.b0]),
            D=np.vstack([self.D, other.D]),
            tags=self.tags + other.tags,
            samples=np.concatenate([self.samples, other.samples]),
        )

    def describe_row(self, r: int) -> str:
        s = int(self.samples[r])
        where = f"sample {s}" if s >= 0 else "input"
        return f"{self.tags[r]} @ {where}"


def slip_bound(
    k: float, mu: float, z_H: float, safety_factor: float = 1.0
) -> float:
    """Symmetric bound on the CoM offset along one axis from the friction cone.

    Derived by rotating the ground reaction force into the slope frame and
    imposing Coulomb friction with effective coefficient ``safety_factor*mu``;
    the binding side is the uphill one, giving (mu' - k) z_H / (1 + k^2).
    """
    if z_H <= 0:
        raise InvalidParameterError(f"z_H must be positive, got {z_H}")
    if not (0.0 < safety_factor <= 1.0):
        raise InvalidParameterError(
            f"safety_factor must lie in (0, 1], got {safety_factor}"
        )
    mu_eff = safety_factor * mu
    if mu_eff <= abs(k):
        raise SlipBoundInfeasibleError(
            f"effective friction {mu_eff:.4f} does not exceed slope |{k:.4f}|; "
            "standing still already slips"
        )
    return (mu_eff - k) * z_H / (1.0 + k * k)


def grf_ratios(
    x_c: float, y_c: float, terrain: TerrainPlane
) -> tuple[float, float]:
    """Tangential-to-normal ground reaction force ratios (F_x/F_z, F_y/F_z)."""
    d = terrain.k_x * x_c + terrain.k_y * y_c + terrain.z_H
    if d <= 0:
        raise DegenerateGeometryError(
            f"non-positive support height {d:.3e} at (x_c={x_c}, y_c={y_c})"
        )
    return (x_c / d, y_c / d)


def _terrain_sequence(
    terrain: TerrainPlane | Sequence[TerrainPlane], n_samples: int
) -> list[TerrainPlane]:
    if isinstance(terrain, TerrainPlane):
        return [terrain] * n_samples
    seq = list(terrain)
    if len(seq) != n_samples:
        raise InvalidParameterError(
            f"terrain preview has {len(seq)} entries, expected {n_samples}"
        )
    return seq


def build_state_constraints(
    config: WorkspaceConfig,
    terrain: TerrainPlane | Sequence[TerrainPlane],
    stance_sequence: Sequence[StanceSide],
    geometry: HorizonGeometry,
) -> LinearInequalitySet:
    """Slip and mechanical box rows for every intra-step sample 1..N.

    ``terrain`` is either one plane or a per-sample preview (length N) used
    when the friction schedule changes inside the horizon.
    ``stance_sequence`` gives the stance of each planned step 1..N_s.
    """
    if len(stance_sequence) != geometry.N_s:
        raise InvalidParameterError(
            f"stance_sequence has {len(stance_sequence)} entries, expected {geometry.N_s}"
        )
    N = geometry.n_samples
    terrains = _terrain_sequence(terrain, N)
    m = config.margin

    x_box = config.x_c_bounds.shrunk(m)
    y_boxes = [config.y_c_bounds(s).shrunk(m) for s in stance_sequence]

    sx = np.array(
        [slip_bound(t.k_x, t.mu, t.z_H, config.mu_safety_factor) - m for t in terrains]
    )
    sy = np.array(
        [slip_bound(t.k_y, t.mu, t.z_H, config.mu_safety_factor) - m for t in terrains]
    )
    if (sx <= 0).any() or (sy <= 0).any():
        raise InvalidParameterError(f"margin {m} exceeds a slip bound in the horizon")
    y_hi = np.repeat([b.hi for b in y_boxes], geometry.N_dt)
    y_lo = np.repeat([b.lo for b in y_boxes], geometry.N_dt)

    # 8 rows per sample: +/- slip per axis, then the +/- mechanical boxes.
    Gx = geometry.Gamma[1:, 0, :]
    Gy = geometry.Gamma[1:, 1, :]
    Px = geometry.Phi[1:, 0, :]
    Py = geometry.Phi[1:, 1, :]
    G = np.stack([Gx, -Gx, Gy, -Gy, Gx, -Gx, Gy, -Gy], axis=1).reshape(8 * N, -1)
    D = -np.stack([Px, -Px, Py, -Py, Px, -Px, Py, -Py], axis=1).reshape(8 * N, 4)
    b0 = np.stack(
        [
            sx,
            sx,
            sy,
            sy,
            np.full(N, x_box.hi),
            np.full(N, -x_box.lo),
            y_hi,
            -y_lo,
        ],
        axis=1,
    ).reshape(8 * N)
    tags = [
        TAG_SLIP_X, TAG_SLIP_X, TAG_SLIP_Y, TAG_SLIP_Y,
        TAG_MECH_X, TAG_MECH_X, TAG_MECH_Y, TAG_MECH_Y,
    ] * N
    samples = np.repeat(np.arange(1, N + 1), 8)

    return LinearInequalitySet(
        n_vars=geometry.n_vars, G=G, b0=b0, D=D, tags=tags, samples=samples
    )


def build_input_constraints(
    config: WorkspaceConfig,
    stance_sequence: Sequence[StanceSide],
) -> LinearInequalitySet:
    """Box rows on every placement; the lateral interval follows the stance
    of the step each placement ends."""
    N_s = len(stance_sequence)
    n = 2 * N_s
    rows_G, rows_b, tags = [], [], []
    for j, stance in enumerate(stance_sequence):
        ux = config.u_x_bounds
        uy = config.u_y_bounds(stance)
        for comp, box, tag in ((0, ux, TAG_INPUT_X), (1, uy, TAG_INPUT_Y)):
            for sign, ub in ((+1.0, box.hi), (-1.0, -box.lo)):
                g = np.zeros(n)
                g[2 * j + comp] = sign
                rows_G.append(g)
                rows_b.append(ub)
                tags.append(tag)
    R = len(rows_G)
    return LinearInequalitySet(
        n_vars=n,
        G=np.array(rows_G).reshape(R, n),
        b0=np.array(rows_b),
        D=np.zeros((R, 4)),
        tags=tags,
        samples=-np.ones(R, dtype=int),
    )
