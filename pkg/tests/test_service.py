import pytest
from fastapi.testclient import TestClient

from aoiq.service.app import create_app
from aoiq.sweeps import CSV_HEADER

MM1 = "sources = 0.5\nservice = exp(rate=1)\nrepair = exp(rate=1)\nalpha = 0\n"


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_health(self, client):
        res = client.get("/health")
        assert res.status_code == 200
        body = res.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestAnalyze:
    def test_known_value(self, client):
        res = client.post("/analyze", json={"config": MM1})
        assert res.status_code == 200
        body = res.json()
        assert body["per_source"][0]["delta_pooled"] == pytest.approx(3.5, rel=1e-9)
        assert body["p0"] == pytest.approx(0.5, rel=1e-12)
        assert body["availability"] == 1.0

    def test_overrides_applied(self, client):
        res = client.post("/analyze", json={"config": MM1, "overrides": {"alpha": "0.1"}})
        assert res.status_code == 200
        assert res.json()["availability"] < 1.0

    def test_parse_error_maps_to_422(self, client):
        res = client.post("/analyze", json={"config": "nope = 1\n"})
        assert res.status_code == 422
        detail = res.json()["detail"]
        assert detail["key"] == "nope"
        assert detail["line"] == 1

    def test_instability_maps_to_409(self, client):
        res = client.post(
            "/analyze",
            json={"config": "sources = 3.0\nservice = exp(rate=1)\nrepair = exp(rate=1)\n"},
        )
        assert res.status_code == 409
        assert res.json()["detail"]["rho"] > 1.0

    def test_multi_point_scenario_rejected(self, client):
        res = client.post("/analyze", json={"config": "preset = fig3\n"})
        assert res.status_code == 422


class TestSimulate:
    def test_deterministic_runs(self, client):
        payload = {
            "config": MM1,
            "overrides": {"replications": "4", "horizon": "1500", "seed": "9"},
        }
        a = client.post("/simulate", json=payload)
        b = client.post("/simulate", json=payload)
        assert a.status_code == 200
        assert a.json() == b.json()
        body = a.json()
        assert body["stable"] is True
        assert body["per_source"][0]["deliveries"] > 0
        assert body["idle_fraction"]["ci95"] > 0

    def test_trace_rows_included_on_request(self, client):
        payload = {
            "config": MM1,
            "overrides": {"replications": "1", "horizon": "50"},
            "trace": True,
        }
        body = client.post("/simulate", json=payload).json()
        assert body["trace"]
        row = body["trace"][0]
        assert set(row) == {"time", "event_type", "source", "queue_len", "server_mode"}

    def test_unstable_simulation_allowed(self, client):
        res = client.post(
            "/simulate",
            json={
                "config": "sources = 3.0\nservice = exp(rate=1)\nrepair = exp(rate=1)\n",
                "overrides": {"replications": "2", "horizon": "500"},
            },
        )
        assert res.status_code == 200
        assert res.json()["stable"] is False


class TestSweepEndpoint:
    def test_files_with_schema(self, client):
        res = client.post(
            "/sweep",
            json={
                "config": "preset = fig3\nservice_families = h2\n",
                "include_simulation": False,
            },
        )
        assert res.status_code == 200
        files = res.json()["files"]
        assert [f["filename"] for f in files] == ["fig3_h2.csv"]
        assert files[0]["csv_text"].splitlines()[0] == CSV_HEADER


class TestCompareEndpoint:
    def test_verdict_reported(self, client):
        res = client.post(
            "/compare",
            json={
                "config": (
                    "sources = 0.5, 0.12\nservice_families = erlang2\n"
                    "replications = 3\nhorizon = 800\nseed = 5\n"
                )
            },
        )
        assert res.status_code == 200
        body = res.json()
        assert body["verdict"] in ("pooled", "per_source")
        assert "# variant_verdict:" in body["verdict_line"]
        assert body["points"][0]["stable"] is True
