import numpy as np
import pytest

from alip_mpc import (
    AlipState,
    RobotParams,
    TerrainPlane,
    apply_impact,
    build_alip_matrix,
    expm_oracle,
    predict_to_impact,
    step_transition,
)
from alip_mpc.errors import InvalidParameterError


class TestBuildAlipMatrix:
    def test_direct_entries(self, params, flat):
        A = build_alip_matrix(params, flat)
        assert A[3, 0] == pytest.approx(313.92, abs=1e-12)
        assert A[0, 3] == pytest.approx(0.0390625, abs=1e-15)
        assert A[1, 2] == pytest.approx(-0.0390625, abs=1e-15)
        assert A[2, 1] == pytest.approx(-313.92, abs=1e-12)

    def test_traceless(self, params, flat):
        assert np.trace(build_alip_matrix(params, flat)) == 0.0

    def test_decoupled_blocks(self, params, flat):
        A = build_alip_matrix(params, flat)
        # sagittal block over (x_c, L_y), frontal over (y_c, L_x); all
        # cross-block entries vanish
        coupled = {(0, 3), (3, 0), (1, 2), (2, 1)}
        for i in range(4):
            for j in range(4):
                if (i, j) not in coupled:
                    assert A[i, j] == 0.0

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParameterError):
            RobotParams(m=-1.0)
        with pytest.raises(InvalidParameterError):
            RobotParams(g=0.0)
        with pytest.raises(InvalidParameterError):
            TerrainPlane(z_H=-0.1)


class TestStepTransition:
    def test_zero_dt_identity(self, params, flat):
        assert np.allclose(step_transition(params, flat, 0.0), np.eye(4), atol=0)

    def test_matches_expm_oracle(self, params, flat):
        Phi = step_transition(params, flat, 0.3)
        E = expm_oracle(build_alip_matrix(params, flat), 0.3)
        assert np.linalg.norm(Phi - E) < 1e-10

    def test_unit_determinant(self, params, flat, rng):
        for dt in rng.uniform(0.0, 1.0, 50):
            assert abs(np.linalg.det(step_transition(params, flat, dt)) - 1.0) < 1e-10

    def test_semigroup(self, params, flat, rng):
        for _ in range(20):
            a, b = rng.uniform(0.0, 0.5, 2)
            lhs = step_transition(params, flat, a) @ step_transition(params, flat, b)
            rhs = step_transition(params, flat, a + b)
            assert np.abs(lhs - rhs).max() < 1e-10

    def test_rejects_negative_dt(self, params, flat):
        with pytest.raises(InvalidParameterError):
            step_transition(params, flat, -0.01)


class TestExpmOracle:
    def test_zero_matrix(self):
        assert np.array_equal(expm_oracle(np.zeros((4, 4)), 1.0), np.eye(4))

    def test_diagonal(self):
        d = np.array([0.3, -1.2, 2.0, 0.0])
        E = expm_oracle(np.diag(d), 1.0)
        assert np.allclose(E, np.diag(np.exp(d)), rtol=1e-13, atol=1e-15)

    def test_first_order_taylor(self, params, flat):
        A = build_alip_matrix(params, flat)
        E = expm_oracle(A, 0.01)
        first_order = np.eye(4) + A * 0.01
        # remaining error is O(t^2); (A t)^2 / 2 dominates
        assert np.abs(E - first_order).max() < 1e-3 * max(1.0, np.abs(A).max())

    def test_rejects_nonfinite(self):
        M = np.zeros((4, 4))
        M[0, 0] = np.nan
        with pytest.raises(InvalidParameterError):
            expm_oracle(M, 1.0)


class TestApplyImpact:
    def test_zero_placement_identity(self):
        x = AlipState(0.12, -0.07, 1.5, 20.0)
        assert apply_impact(x, np.zeros(2)) == x

    def test_step_onto_com(self):
        x = AlipState(0.12, -0.07, 1.5, 20.0)
        y = apply_impact(x, np.array([x.x_c, x.y_c]))
        assert y.x_c == 0.0 and y.y_c == 0.0
        assert y.L_x == x.L_x and y.L_y == x.L_y

    def test_direct_addition(self):
        x = AlipState(0.1, -0.15, 2.0, 8.0)
        y = apply_impact(x, np.array([0.4, -0.3]))
        assert y.x_c == pytest.approx(-0.3, abs=1e-15)
        assert y.y_c == pytest.approx(0.15, abs=1e-15)
        assert (y.L_x, y.L_y) == (2.0, 8.0)

    def test_momenta_always_conserved(self, rng):
        for _ in range(100):
            x = AlipState(*rng.normal(0.0, 1.0, 4))
            u = rng.normal(0.0, 0.5, 2)
            y = apply_impact(x, u)
            assert y.L_x == x.L_x and y.L_y == x.L_y


class TestPredictToImpact:
    def test_zero_remaining(self, params, flat):
        x = AlipState(0.05, -0.1, 3.0, 12.0)
        assert predict_to_impact(x, 0.0, params, flat) == x

    def test_full_step_matches_transition(self, params, flat):
        x = AlipState(0.05, -0.1, 3.0, 12.0)
        y = predict_to_impact(x, params.T_s, params, flat)
        expected = step_transition(params, flat, params.T_s) @ x.as_array()
        assert np.allclose(y.as_array(), expected, atol=0)

    def test_linearity(self, params, flat):
        x = AlipState(0.05, -0.1, 3.0, 12.0)
        x2 = AlipState(0.1, -0.2, 6.0, 24.0)
        y = predict_to_impact(x, 0.17, params, flat).as_array()
        y2 = predict_to_impact(x2, 0.17, params, flat).as_array()
        assert np.abs(y2 - 2.0 * y).max() < 1e-12

    def test_rejects_out_of_range(self, params, flat):
        x = AlipState(0.0, 0.0, 0.0, 0.0)
        with pytest.raises(InvalidParameterError):
            predict_to_impact(x, -0.01, params, flat)
        with pytest.raises(InvalidParameterError):
            predict_to_impact(x, params.T_s + 0.01, params, flat)


def test_transition_vs_oracle_battery(rng):
    """1000 random robot-scale draws: closed form and oracle agree to 1e-10."""
    worst = 0.0
    for _ in range(1000):
        p = RobotParams(
            m=rng.uniform(16.0, 64.0), g=rng.uniform(9.0, 10.5), T_s=0.3
        )
        t = TerrainPlane(z_H=rng.uniform(0.5, 1.2))
        dt = rng.uniform(0.0, 1.0)
        Phi = step_transition(p, t, dt)
        E = expm_oracle(build_alip_matrix(p, t), dt)
        worst = max(worst, float(np.linalg.norm(Phi - E)))
    assert worst <= 1e-10
