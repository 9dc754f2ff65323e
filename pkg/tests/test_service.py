import json

import pytest
from fastapi.testclient import TestClient

from groundcite.rewards import RewardConfig, compute_rewards
from groundcite.service import ServiceConfig, create_app
from groundcite.tagfmt import Decomposition, serialize

DOC = "the quick brown fox jumps over the lazy dog"


@pytest.fixture()
def client():
    return TestClient(create_app(ServiceConfig(max_batch=10)))


def _sample():
    output = serialize(Decomposition("r", (("u", "quick brown"),)))
    return {"output": output, "document": DOC, "gt_citations": ["quick brown"]}


def test_health(client):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["engine_version"]
    assert len(body["config_digest"]) == 64


def test_score_matches_library(client):
    resp = client.post("/v1/score", json={"samples": [_sample()]})
    assert resp.status_code == 200
    body = resp.json()
    expected = compute_rewards(
        _sample()["output"], DOC, ["quick brown"], RewardConfig()
    )
    assert body["results"][0] == expected.as_dict()
    assert body["engine_version"]
    assert body["config"]["alpha"] == 0.75


def test_score_malformed_json_400_with_position(client):
    resp = client.post(
        "/v1/score",
        content=b'{"samples": [',
        headers={"Content-Type": "application/json"},
    )
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert "malformed JSON" in err["message"]
    assert {"line", "column", "position"} <= set(err)


def test_score_empty_batch_400(client):
    assert client.post("/v1/score", json={"samples": []}).status_code == 400
    assert client.post("/v1/score", json={}).status_code == 400
    assert client.post("/v1/score", json=[1]).status_code == 400


def test_score_oversized_batch_413(client):
    samples = [_sample()] * 11
    resp = client.post("/v1/score", json={"samples": samples})
    assert resp.status_code == 413
    assert resp.json()["error"]["limit"] == 10


def test_score_per_sample_isolation(client):
    samples = [_sample(), {"output": 5}, _sample()]
    resp = client.post("/v1/score", json={"samples": samples})
    assert resp.status_code == 200
    results = resp.json()["results"]
    assert "total" in results[0]
    assert "error" in results[1]
    assert "total" in results[2]
    assert results[0] == results[2]


def test_score_overrides_alpha_and_weights(client):
    sample = _sample()
    base = client.post("/v1/score", json={"samples": [sample]}).json()
    tweaked = client.post(
        "/v1/score",
        json={"samples": [sample], "overrides": {"alpha": 0.5, "weight_format": 2.0}},
    ).json()
    assert tweaked["config"]["alpha"] == 0.5
    assert tweaked["results"][0]["total"] > base["results"][0]["total"]


def test_score_rejects_unknown_override(client):
    resp = client.post(
        "/v1/score",
        json={"samples": [_sample()], "overrides": {"similarity_mode": "fast"}},
    )
    assert resp.status_code == 400
    assert "similarity_mode" in resp.json()["error"]["message"]


def test_score_invalid_override_value(client):
    resp = client.post(
        "/v1/score", json={"samples": [_sample()], "overrides": {"alpha": 2.0}}
    )
    assert resp.status_code == 400


def test_wire_floats_round_trip_exactly(client):
    resp = client.post("/v1/score", json={"samples": [_sample()]})
    wire = json.loads(resp.content)["results"][0]
    expected = compute_rewards(_sample()["output"], DOC, ["quick brown"])
    for key, value in expected.as_dict().items():
        assert wire[key] == value
