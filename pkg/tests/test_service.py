import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from yopt.objectives import generate_tsp
from yopt.record import canonical_json
from yopt.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestHealth:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"


class TestRunEndpoint:
    def test_run_returns_record(self, client):
        response = client.post(
            "/run",
            json={"problem": "rosenbrock5d", "algorithm": "yo", "seed": 7, "budget": 120},
        )
        assert response.status_code == 200
        record = response.json()["record"]
        assert record["evaluations_used"] <= 120
        assert len(record["best_position"]) == 5
        assert "wall_time_ms" in record

    def test_run_is_deterministic_modulo_timing(self, client):
        payload = {"problem": "rosenbrock5d", "algorithm": "sa", "seed": 3, "budget": 80}
        records = []
        for _ in range(2):
            record = client.post("/run", json=payload).json()["record"]
            record.pop("wall_time_ms")
            records.append(canonical_json(record))
        assert records[0] == records[1]

    def test_validation_error(self, client):
        response = client.post("/run", json={"problem": "ackley10d"})
        assert response.status_code == 422

    def test_domain_error_maps_to_400(self, client):
        response = client.post(
            "/run",
            json={"problem": "tsp", "tsp_n": 10, "algorithm": "apso", "budget": 50},
        )
        assert response.status_code == 400
        assert "continuous" in response.json()["detail"]

    def test_overrides_are_validated(self, client):
        response = client.post(
            "/run",
            json={"problem": "rosenbrock5d", "algorithm": "yo", "budget": 50,
                  "overrides": {"not_a_field": 1}},
        )
        assert response.status_code == 400


class TestExperimentEndpoints:
    def test_ablation_shape(self, client):
        body = client.post("/experiments/ablation", json={"budget": 60, "runs": 2}).json()
        assert [v["name"] for v in body["variants"]] == [
            "A0_full", "A1_no_mcmc", "A2_no_greedy", "A3_no_sa",
            "A4_no_blacklist", "A5_single_chain",
        ]
        assert len(body["table"]) == 6
        assert body["reference"] == "A0_full"

    def test_tsp_returns_instances(self, client):
        body = client.post(
            "/experiments/tsp", json={"n": 10, "seeds": [42], "budget": 200}
        ).json()
        coords = np.asarray(body["instances"]["42"])
        assert np.allclose(coords, generate_tsp(10, 42).coords)
        assert {v["name"] for v in body["variants"]} == {"yo", "two_opt", "sa", "ga", "random"}

    def test_continuous_with_external_rows(self, client):
        body = client.post(
            "/experiments/continuous",
            json={
                "budget": 50,
                "runs": 2,
                "external": [
                    {"algorithm": "surrogate", "seed": 0, "final_best": 1.0},
                    {"algorithm": "surrogate", "seed": 1, "final_best": 2.0},
                ],
            },
        ).json()
        names = [v["name"] for v in body["variants"]]
        assert "surrogate" in names
        assert body["reference"] == "surrogate"

    def test_tsp_instance_endpoint(self, client):
        body = client.get("/tsp/instance", params={"n": 6, "seed": 3}).json()
        assert np.allclose(np.asarray(body["coords"]), generate_tsp(6, 3).coords)
        assert body["n"] == 6
