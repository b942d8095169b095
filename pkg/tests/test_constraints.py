import math

import numpy as np
import pytest

from alip_mpc import (
    Interval,
    StanceSide,
    TerrainPlane,
    WorkspaceConfig,
    build_input_constraints,
    build_state_constraints,
    grf_ratios,
    slip_bound,
)
from alip_mpc.errors import (
    DegenerateGeometryError,
    InvalidParameterError,
    SlipBoundInfeasibleError,
)
from alip_mpc.horizon import build_horizon


class TestSlipBound:
    def test_flat_ground(self):
        assert slip_bound(0.0, 0.6, 0.8) == pytest.approx(0.48, abs=1e-15)
        assert slip_bound(0.0, 0.2, 0.8) == pytest.approx(0.16, abs=1e-15)

    def test_five_degree_slope_with_safety(self):
        k = math.tan(math.radians(5.0))
        got = slip_bound(k, 0.6, 0.8, safety_factor=1.0 / math.sqrt(2.0))
        assert got == pytest.approx(0.2674, abs=1e-4)
        # independent route: Coulomb inequality on the rotated reaction
        # force holds with equality at the returned offset
        mu_eff = 0.6 / math.sqrt(2.0)
        F = got / (k * got + 0.8)
        assert abs(F + k) == pytest.approx(-mu_eff * k * F + mu_eff, abs=1e-12)
        F_in = 0.99 * got / (k * 0.99 * got + 0.8)
        assert abs(F_in + k) < -mu_eff * k * F_in + mu_eff

    def test_monotone_in_slope_and_friction(self):
        ks = np.linspace(-0.3, 0.3, 13)
        bounds = [slip_bound(k, 0.6, 0.8) for k in ks]
        assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
        mus = np.linspace(0.35, 1.0, 9)
        bounds_mu = [slip_bound(0.3, m, 0.8) for m in mus]
        assert all(b2 > b1 for b1, b2 in zip(bounds_mu, bounds_mu[1:]))

    def test_safety_factor_strictly_inside(self, rng):
        for _ in range(50):
            k = rng.uniform(-0.4, 0.4)
            mu = abs(k) * math.sqrt(2.0) + rng.uniform(0.05, 0.8)
            z_H = rng.uniform(0.4, 1.2)
            assert slip_bound(k, mu, z_H, 1.0 / math.sqrt(2.0)) < slip_bound(
                k, mu, z_H, 1.0
            )

    def test_slope_exceeding_friction_rejected(self):
        with pytest.raises(SlipBoundInfeasibleError):
            slip_bound(0.3, 0.4, 0.8, safety_factor=1.0 / math.sqrt(2.0))


class TestGrfRatios:
    def test_origin(self, flat):
        assert grf_ratios(0.0, 0.0, flat) == (0.0, 0.0)

    def test_flat_reduction(self, flat):
        fx, fy = grf_ratios(0.2, -0.1, flat)
        assert fx == pytest.approx(0.25)
        assert fy == pytest.approx(-0.125)

    def test_sloped(self):
        t = TerrainPlane(k_x=0.2, k_y=0.1, z_H=0.8)
        fx, fy = grf_ratios(0.2, 0.1, t)
        assert fx == pytest.approx(0.2 / 0.85)
        assert fy == pytest.approx(0.1 / 0.85)

    def test_degenerate_rejected(self):
        t = TerrainPlane(k_x=2.0, k_y=0.0, mu=3.0, z_H=0.8)
        with pytest.raises(DegenerateGeometryError):
            grf_ratios(-0.5, 0.0, t)


class TestStateConstraints:
    def test_row_count_single_sample(self, params, flat):
        geo = build_horizon(params, flat, N_s=1, N_dt=1)
        cfg = WorkspaceConfig(mu_safety_factor=1.0)
        rows = build_state_constraints(cfg, flat, [StanceSide.LEFT], geo)
        assert rows.n_rows == 8
        assert all(t in {"slip-x", "slip-y", "mech-x", "mech-y"} for t in rows.tags)

    def test_slip_bound_appears_in_bounds(self, params):
        terrain = TerrainPlane(mu=0.2, z_H=0.8)
        geo = build_horizon(params, terrain, N_s=2, N_dt=3)
        cfg = WorkspaceConfig(mu_safety_factor=1.0)
        stances = [StanceSide.LEFT, StanceSide.RIGHT]
        rows = build_state_constraints(cfg, terrain, stances, geo)
        slip_x = [b for b, t in zip(rows.b0, rows.tags) if t == "slip-x"]
        assert len(slip_x) == 2 * geo.n_samples
        assert all(b == pytest.approx(0.16, abs=1e-15) for b in slip_x)

    def test_stance_dependent_lateral_boxes(self, params, flat):
        geo = build_horizon(params, flat, N_s=2, N_dt=2)
        cfg = WorkspaceConfig(mu_safety_factor=1.0)
        rows = build_state_constraints(
            cfg, flat, [StanceSide.LEFT, StanceSide.RIGHT], geo
        )
        # mech-y rows come in (upper, lower) pairs per sample; samples 1-2
        # belong to the left-stance step, samples 3-4 to the right
        for r in range(rows.n_rows):
            if rows.tags[r] != "mech-y":
                continue
            i = int(rows.samples[r])
            box = cfg.y_c_bounds(StanceSide.LEFT if i <= 2 else StanceSide.RIGHT)
            assert rows.b0[r] in (
                pytest.approx(box.hi, abs=1e-15),
                pytest.approx(-box.lo, abs=1e-15),
            )

    def test_row_semantics_against_simulation(self, params, flat, rng):
        """Each row is a signed state component: G U - D x0 = +/- x_i[c]."""
        geo = build_horizon(params, flat, N_s=2, N_dt=3)
        cfg = WorkspaceConfig(mu_safety_factor=1.0)
        rows = build_state_constraints(
            cfg, flat, [StanceSide.LEFT, StanceSide.RIGHT], geo
        )
        x0 = rng.normal(0.0, 0.1, 4)
        U = rng.normal(0.0, 0.2, geo.n_vars)
        states = geo.predict(x0, U)
        signed = rows.G @ U - rows.D @ x0
        for r in range(rows.n_rows):
            i = int(rows.samples[r])
            comp = 0 if rows.tags[r].endswith("-x") else 1
            assert abs(signed[r]) == pytest.approx(abs(states[i, comp]), abs=1e-12)

    def test_margin_shrinks_bounds(self, params, flat):
        geo = build_horizon(params, flat, N_s=1, N_dt=1)
        base = build_state_constraints(
            WorkspaceConfig(mu_safety_factor=1.0), flat, [StanceSide.LEFT], geo
        )
        shrunk = build_state_constraints(
            WorkspaceConfig(mu_safety_factor=1.0, margin=0.01),
            flat,
            [StanceSide.LEFT],
            geo,
        )
        assert np.all(shrunk.b0 <= base.b0 - 0.01 + 1e-15)

    def test_high_friction_slip_nonbinding(self, params):
        terrain = TerrainPlane(mu=1e3, z_H=0.8)
        geo = build_horizon(params, terrain, N_s=1, N_dt=2)
        cfg = WorkspaceConfig(mu_safety_factor=1.0)
        rows = build_state_constraints(cfg, terrain, [StanceSide.LEFT], geo)
        slip = [b for b, t in zip(rows.b0, rows.tags) if t.startswith("slip")]
        mech = [b for b, t in zip(rows.b0, rows.tags) if t.startswith("mech")]
        assert min(slip) > max(mech)


class TestInputConstraints:
    def test_row_count(self):
        stances = [StanceSide.LEFT, StanceSide.RIGHT] * 2
        rows = build_input_constraints(WorkspaceConfig(), stances)
        assert rows.n_rows == 16
        assert np.all(rows.samples == -1)
        assert np.all(rows.D == 0.0)

    def test_mirrored_lateral_interval(self):
        cfg = WorkspaceConfig()
        left = build_input_constraints(cfg, [StanceSide.LEFT])
        right = build_input_constraints(cfg, [StanceSide.RIGHT])
        ly = sorted(b for b, t in zip(left.b0, left.tags) if t == "input-y")
        ry = sorted(b for b, t in zip(right.b0, right.tags) if t == "input-y")
        # left allows u_y in [-0.45, -0.10]; right mirrors to [0.10, 0.45]
        assert ly == pytest.approx([-0.10, 0.45])
        assert ry == pytest.approx([-0.10, 0.45])
        gl = [left.G[r, 1] for r in range(4) if left.tags[r] == "input-y"]
        gr = [right.G[r, 1] for r in range(4) if right.tags[r] == "input-y"]
        assert sorted(gl) == [-1.0, 1.0] and sorted(gr) == [-1.0, 1.0]

    def test_symmetric_cap_rows(self):
        cfg = WorkspaceConfig(u_x_bounds=Interval(-0.5, 0.5))
        rows = build_input_constraints(cfg, [StanceSide.LEFT])
        caps = [b for b, t in zip(rows.b0, rows.tags) if t == "input-x"]
        assert caps == pytest.approx([0.5, 0.5])

    def test_empty_interval_rejected(self):
        with pytest.raises(InvalidParameterError):
            Interval(0.2, -0.2)


def test_every_row_tagged(params, flat):
    geo = build_horizon(params, flat, N_s=3, N_dt=2)
    stances = [StanceSide.LEFT, StanceSide.RIGHT, StanceSide.LEFT]
    rows = build_state_constraints(
        WorkspaceConfig(mu_safety_factor=1.0), flat, stances, geo
    ).concat(build_input_constraints(WorkspaceConfig(), stances))
    assert len(rows.tags) == rows.n_rows
    assert all(isinstance(rows.describe_row(r), str) for r in range(rows.n_rows))
