import json

import pytest
from fastapi.testclient import TestClient

from alip_mpc.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def scenario_payload(**over):
    data = {"duration": 1.2, "commands": [{"t_start": 0.0, "v_x": 0.5}]}
    data.update(over)
    return data


class TestHealth:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"


class TestSimulateEndpoint:
    def test_runs_and_returns_csv(self, client):
        r = client.post("/simulate", json={"scenario": scenario_payload()})
        assert r.status_code == 200
        body = r.json()
        header = body["csv"].splitlines()[0]
        assert header.count(",") == 21
        assert body["summary"]["steps_completed"] == 4
        assert body["summary"]["truncated"] is False

    def test_rejects_unknown_keys(self, client):
        r = client.post(
            "/simulate", json={"scenario": scenario_payload(warp_drive=1)}
        )
        assert r.status_code == 422

    def test_rejects_bad_duration(self, client):
        r = client.post(
            "/simulate", json={"scenario": scenario_payload(duration=1.0)}
        )
        assert r.status_code == 422
        assert "multiple" in r.text

    def test_csv_identical_across_calls(self, client):
        a = client.post("/simulate", json={"scenario": scenario_payload()}).json()
        b = client.post("/simulate", json={"scenario": scenario_payload()}).json()
        assert a["csv"] == b["csv"]


class TestPlanEndpoint:
    def test_plan_default_orbit_state(self, client):
        r = client.post("/plan", json={"scenario": scenario_payload()})
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "optimal"
        assert len(body["u_sequence"]) == 4
        assert body["kkt_residuals"]["primal"] <= 1e-6

    def test_plan_explicit_state(self, client):
        r = client.post(
            "/plan",
            json={
                "scenario": scenario_payload(),
                "state": [0.05, 0.1, -1.0, 12.0],
                "time_remaining": 0.15,
                "stance": "right",
            },
        )
        assert r.status_code == 200
        assert r.json()["status"] == "optimal"

    def test_plan_rejects_bad_stance(self, client):
        r = client.post(
            "/plan", json={"scenario": scenario_payload(), "stance": "middle"}
        )
        assert r.status_code == 422


class TestGainsEndpoint:
    def test_gains_shapes_and_residual(self, client):
        r = client.post("/gains", json={"scenario": scenario_payload()})
        assert r.status_code == 200
        body = r.json()
        assert len(body["A_d"]) == 4 and len(body["A_d"][0]) == 4
        assert len(body["B_d"]) == 4 and len(body["B_d"][0]) == 2
        assert body["dare_residual"] < 1e-10
        assert body["natural_frequency"] == pytest.approx(3.5017852589786256)


class TestSweepEndpoint:
    def test_two_horizons(self, client):
        r = client.post(
            "/sweep",
            json={"scenario": scenario_payload(), "horizons": [2, 4]},
        )
        assert r.status_code == 200
        runs = r.json()["runs"]
        assert [run["horizon"] for run in runs] == [2, 4]
        assert all(run["csv"].startswith("t,") for run in runs)

    def test_rejects_empty_horizons(self, client):
        r = client.post(
            "/sweep", json={"scenario": scenario_payload(), "horizons": []}
        )
        assert r.status_code == 422
