"""Contract tests for the FastAPI service."""

import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from photonlink.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_synth_endpoint(client):
    resp = client.post("/synth", json={"config": {"modes": [0]}})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["waveforms"]) == 2
    directions = {w["direction"] for w in body["waveforms"]}
    assert directions == {"emit", "absorb"}
    wf = body["waveforms"][0]
    assert len(wf["t_ns"]) == len(wf["re_g_over_2pi_MHz"])
    assert body["feasibility"][0]["captured"] >= 0.99
    assert body["config_hash"]


def test_synth_feasibility_error(client):
    resp = client.post("/synth", json={"config": {"gamma_mhz": 30.0}})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["error_type"] == "FeasibilityError"
    assert detail["exit_code"] == 3


def test_bad_config_rejected(client):
    resp = client.post("/synth", json={"config": {"source": "nonsense"}})
    assert resp.status_code == 422
    resp = client.post("/synth", json={"config": {"gamma_mhz": -2.0}})
    assert resp.status_code == 422


def test_transfer_endpoint_model_source(client):
    resp = client.post("/transfer", json={"config": {
        "gamma_mhz": 24.0, "noise_sigma": 0.0, "sweep_points": 15,
    }})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["sweeps"]) == 9
    assert body["fit"]["converged"]
    assert body["fit"]["tau0_ns"] == pytest.approx(145.9, abs=1e-6)
    assert body["fit"]["p_loss"] == pytest.approx(0.17, abs=1e-8)
    m = np.asarray(body["matrix"])
    np.testing.assert_allclose(np.diag(m), 0.83, atol=1e-8)
    assert body["selectivity_infinite"]


def test_transfer_endpoint_reference_source(client):
    resp = client.post("/transfer", json={"config": {"source": "file"}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["provenance"] == "reference"
    assert body["selectivity"] == pytest.approx(40.0, rel=0.25)


def test_fit_endpoint(client):
    base = client.post("/transfer", json={"config": {
        "gamma_mhz": 24.0, "noise_sigma": 0.0, "sweep_points": 12,
    }}).json()
    rows = []
    for s in base["sweeps"]:
        for t, pf in zip(s["tau_ns"], s["pf"]):
            rows.append([t, s["n_a"], s["n_b"], pf])
    resp = client.post("/fit", json={"config": {"gamma_mhz": 24.0}, "data": rows})
    assert resp.status_code == 200
    fit = resp.json()["fit"]
    assert fit["tau0_ns"] == pytest.approx(145.9, abs=1e-6)
    assert fit["p_loss"] == pytest.approx(0.17, abs=1e-8)


def test_emit_sweep_endpoint(client):
    resp = client.post("/emit-sweep", json={"config": {
        "modes": [1], "truncation_step_ns": 2.0,
    }})
    assert resp.status_code == 200
    sweep = resp.json()["sweeps"][0]
    assert sweep["n_plateaus"] == 1
    assert sweep["max_model_deviation"] <= 2e-2


def test_detuning_endpoint_small(client):
    resp = client.post("/detuning", json={"config": {
        "delta_ab_mhz": 2.0, "detuning_points": 5, "detuning_span_mhz": 1.5,
        "p_loss": 0.0,
    }})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["pf"]) == 5 and len(body["pf"][0]) == 5
    assert max(max(row) for row in body["pf"]) > 0.9
