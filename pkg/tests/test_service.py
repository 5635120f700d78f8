import numpy as np
import pytest
from fastapi.testclient import TestClient

from policyscape.policy import POLICY_NAMES, POLICY_RANGES
from policyscape.service import create_app


@pytest.fixture(scope="module")
def client(small_model_file, baseline_study_dir):
    app = create_app(small_model_file, baseline_study_dir, sample_cap=50_000)
    return TestClient(app)


@pytest.fixture(scope="module")
def bare_client(small_model_file):
    return TestClient(create_app(small_model_file, None))


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["model_loaded"] and body["baseline_loaded"]


def test_policies_reflect_table_ranges(client):
    body = client.get("/policies").json()
    assert len(body["policies"]) == 10
    by_name = {p["name"]: p for p in body["policies"]}
    assert set(by_name) == set(POLICY_NAMES)
    for name, (lo, hi, integer) in POLICY_RANGES.items():
        assert by_name[name]["low"] == lo
        assert by_name[name]["high"] == hi
        assert by_name[name]["integer"] == integer
    assert by_name["pcr_mult"]["range_label"] == "1x - 10x"


def test_predict_rejects_out_of_range_naming_field(client):
    r = client.post("/predict", json={"policy": {"pcr_mult": 11}})
    assert r.status_code == 400
    assert "pcr_mult" in r.json()["detail"]
    assert "1x - 10x" in r.json()["detail"]


def test_predict_deterministic_and_complete(client):
    req = {"policy": {"mask_adherence": 0.15, "ct_capacity": 30000}}
    a = client.post("/predict", json=req).json()
    b = client.post("/predict", json=req).json()
    assert a == b
    for outcome in ("cumulative_infections", "svi_variance"):
        p = a["predictions"][outcome]
        assert p["lo90"] <= p["mean"] <= p["hi90"]
        assert p["sd"] >= 0


def test_predict_normalized_point(client):
    point = [0.0] * 10
    r = client.post("/predict", json={"point": point, "normalized": True})
    assert r.status_code == 200
    assert r.json()["policy"]["pcr_mult"] == 1.0

    r = client.post("/predict", json={"point": [0.1] * 3, "normalized": True})
    assert r.status_code == 400


def test_baseline_payload(client):
    body = client.get("/baseline").json()
    labels = [b["bin"] for b in body["attack_rate_by_svi"]]
    assert labels == ["0-0.25", "0.25-0.5", "0.5-0.75", "0.75-1.0"]
    assert body["replicates"] == 5
    assert 0 < body["attack_rate_mean"] < 1


def test_baseline_503_without_study(bare_client):
    r = bare_client.get("/baseline")
    assert r.status_code == 503


def test_predict_matches_baseline_reference(client):
    base = client.get("/baseline").json()
    pred = client.post("/predict", json={"policy": {}}).json()
    p = pred["predictions"]["cumulative_infections"]
    # baseline simulated mean should sit in (a modestly widened) 90% interval
    width = p["hi90"] - p["lo90"]
    assert p["lo90"] - width <= base["attack_rate_mean"] <= p["hi90"] + width


def test_search_trivial_goal(client):
    r = client.post("/search", json={"goal_attack_rate": 1.0, "k": 2,
                                     "n_samples": 2000, "count": 5, "seed": 3})
    body = r.json()
    assert body["fraction_meeting_goal"] == 1.0
    assert len(body["winners"]) == 5
    norms = [w["intensity_norm"] for w in body["winners"]]
    assert norms == sorted(norms)


def test_search_impossible_goal(client):
    r = client.post("/search", json={"goal_attack_rate": 0.0, "k": 2,
                                     "n_samples": 1000, "count": 5})
    body = r.json()
    assert body["fraction_meeting_goal"] == 0.0
    assert body["winners"] == []
    assert body["warning"]


def test_search_deterministic(client):
    req = {"goal_attack_rate": 0.5, "k": 3, "n_samples": 3000, "count": 4,
           "seed": 9}
    a = client.post("/search", json=req).json()
    b = client.post("/search", json=req).json()
    assert a == b


def test_search_cap_and_validation(client):
    r = client.post("/search", json={"goal_attack_rate": 0.5,
                                     "n_samples": 60_000})
    assert r.status_code == 413
    r = client.post("/search", json={"goal_attack_rate": 0.5, "k": 11,
                                     "n_samples": 100})
    assert r.status_code == 400
    r = client.post("/search", json={"goal_attack_rate": 0.5, "k": 2,
                                     "n_samples": 100,
                                     "constraints": {"bogus": 0.5}})
    assert r.status_code == 400


def test_cli_predict_agrees_with_service(client, small_model_file):
    from click.testing import CliRunner
    import json as _json
    from policyscape.cli import main
    result = CliRunner().invoke(main, [
        "predict", "--model", small_model_file, "--set", "vaccine_threshold=0.4"])
    cli_payload = _json.loads(result.output)
    service_payload = client.post(
        "/predict", json={"policy": {"vaccine_threshold": 0.4}}).json()
    assert cli_payload["predictions"] == service_payload["predictions"]
