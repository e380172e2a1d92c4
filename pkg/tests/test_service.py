import numpy as np
import pytest
from fastapi.testclient import TestClient

from glocal.service import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(snapshot_dir=tmp_path / "snaps")
    with TestClient(app) as c:
        yield c


def create_toy(client, budget=2, seed=0, **extra):
    config = {"budget": budget, "seed": seed}
    config.update(extra)
    resp = client.post("/api/sessions",
                       json={"dataset": "toy", "config": config})
    assert resp.status_code == 200, resp.text
    return resp.json()


def small_csv(n=40, n_anomalies=4, d=3, seed=0):
    rng = np.random.default_rng(seed)
    lines = [",".join("f%d" % j for j in range(d)) + ",label"]
    for i in range(n):
        row = rng.normal(size=d) + (8.0 if i < n_anomalies else 0.0)
        label = "anomaly" if i < n_anomalies else "nominal"
        lines.append(",".join("%.4f" % v for v in row) + "," + label)
    return "\n".join(lines)


def test_create_session_shape(client):
    body = create_toy(client, budget=5, seed=0)
    assert len(body["session_id"]) == 12
    assert body["t"] == 0 and body["budget"] == 5
    assert body["anomalies_found"] == 0 and body["done"] is False
    query = body["query"]
    assert set(query) == {"index", "score", "features", "member_scores",
                          "relevance"}
    assert sorted(query["features"]) == ["x", "y"]
    assert len(query["member_scores"]) == 4 == len(query["relevance"])
    assert all(0.0 < p < 1.0 for p in query["relevance"])


def test_same_seed_same_first_query(client):
    a = create_toy(client, seed=4)
    b = create_toy(client, seed=4)
    assert a["session_id"] != b["session_id"]
    assert a["query"]["index"] == b["query"]["index"]
    c = create_toy(client, seed=5)
    assert c["query"]["index"] != a["query"]["index"] or \
        c["query"]["score"] != a["query"]["score"]


def test_create_validation_errors(client):
    def expect_invalid(payload):
        resp = client.post("/api/sessions", json=payload)
        assert resp.status_code == 400
        body = resp.json()
        assert set(body) == {"code", "message"}
        assert body["code"] == "invalid_request"

    expect_invalid({"dataset": "no-such-data"})
    expect_invalid({"dataset": 5})
    expect_invalid({})
    expect_invalid({"dataset": "toy", "config": {"tau": 0.9}})
    expect_invalid({"dataset": "toy", "config": {"budget": 0}})
    expect_invalid({"dataset": "toy", "config": {"frobnicate": 1}})
    expect_invalid({"dataset": {"csv": "not,a\nvalid"}})
    resp = client.post("/api/sessions", content=b"not json",
                       headers={"content-type": "application/json"})
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_request"


def test_label_flow_to_completion(client):
    made = create_toy(client, budget=2, seed=0)
    sid = made["session_id"]
    first = made["query"]["index"]

    resp = client.post("/api/sessions/%s/label" % sid,
                       json={"index": first, "label": "anomaly"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["t"] == 1 and body["done"] is False
    assert body["anomalies_found"] == 1
    assert np.isfinite(body["loss"])
    second = body["next_query"]["index"]
    assert second != first

    resp = client.post("/api/sessions/%s/label" % sid,
                       json={"index": second, "label": -1})
    body = resp.json()
    assert body["done"] is True and body["next_query"] is None
    assert body["t"] == 2
    trace = body["trace"]
    assert [r["iteration"] for r in trace] == [1, 2]
    assert [r["queried_index"] for r in trace] == [first, second]
    assert [r["label"] for r in trace] == [1, -1]
    assert [r["cumulative_anomalies"] for r in trace] == [1, 1]

    # the budget is spent: any further label is a conflict
    resp = client.post("/api/sessions/%s/label" % sid,
                       json={"index": 0, "label": 1})
    assert resp.status_code == 409
    assert resp.json()["code"] == "conflict"


def test_stale_index_conflict(client):
    made = create_toy(client, budget=3, seed=1)
    sid = made["session_id"]
    pending = made["query"]["index"]
    resp = client.post("/api/sessions/%s/label" % sid,
                       json={"index": pending + 1, "label": 1})
    assert resp.status_code == 409
    body = resp.json()
    assert body["code"] == "conflict"
    assert str(pending) in body["message"]
    # the pending query is untouched by the failed call
    resp = client.post("/api/sessions/%s/label" % sid,
                       json={"index": pending, "label": 1})
    assert resp.status_code == 200


def test_label_validation(client):
    made = create_toy(client, budget=2, seed=2)
    sid = made["session_id"]
    idx = made["query"]["index"]
    for payload in ({"index": idx}, {"label": 1}, {"index": idx, "label": 0},
                    {"index": idx, "label": "bogus"},
                    {"index": "x", "label": 1}):
        resp = client.post("/api/sessions/%s/label" % sid, json=payload)
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"


def test_get_state_payload(client):
    made = create_toy(client, budget=2, seed=0)
    sid = made["session_id"]
    client.post("/api/sessions/%s/label" % sid,
                json={"index": made["query"]["index"], "label": "nominal"})

    resp = client.get("/api/sessions/%s" % sid)
    assert resp.status_code == 200
    body = resp.json()
    assert body["session_id"] == sid
    assert body["t"] == 1 and body["budget"] == 2 and body["done"] is False
    assert body["pending"] is not None
    assert len(body["loss_history"]) == 1
    top = body["top"]
    assert len(top) == 20
    assert [r["rank"] for r in top] == list(range(1, 21))
    scores = [r["score"] for r in top]
    assert scores == sorted(scores, reverse=True)
    labeled_rows = [r for r in top if r["labeled"]]
    assert all(r["label"] in (-1, 1) for r in labeled_rows)
    ds = body["dataset"]
    assert ds["name"] == "toy" and ds["d"] == 2
    assert len(ds["points"]) == ds["n"]
    grid = body["grid"]
    assert grid["resolution"] == 50
    assert len(grid["xs"]) == 50 and len(grid["ys"]) == 50
    assert len(grid["score"]) == 50 and len(grid["score"][0]) == 50
    assert len(grid["relevance"]) == 4


def test_high_dimensional_dataset_has_no_grid(client):
    resp = client.post("/api/sessions", json={
        "dataset": {"name": "probe", "csv": small_csv()},
        "config": {"budget": 1, "seed": 0},
    })
    assert resp.status_code == 200
    sid = resp.json()["session_id"]
    body = client.get("/api/sessions/%s" % sid).json()
    assert body["dataset"]["d"] == 3
    assert body["dataset"]["points"] is None
    assert body["grid"] is None


def test_unknown_session_and_instance(client):
    resp = client.get("/api/sessions/doesnotexist")
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown_session"
    resp = client.post("/api/sessions/doesnotexist/label",
                       json={"index": 0, "label": 1})
    assert resp.status_code == 404
    resp = client.get("/api/sessions/doesnotexist/explain/0")
    assert resp.status_code == 404

    made = create_toy(client, budget=1, seed=0)
    resp = client.get("/api/sessions/%s/explain/100000" % made["session_id"])
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown_instance"


def test_explain_contract(client):
    made = create_toy(client, budget=2, seed=0)
    sid = made["session_id"]
    idx = made["query"]["index"]
    resp = client.get("/api/sessions/%s/explain/%d" % (sid, idx))
    assert resp.status_code == 200
    body = resp.json()
    assert body["index"] == idx
    assert 0 <= body["member"] < 4
    assert len(body["relevance"]) == 4 == len(body["member_scores"])
    assert body["score"] == pytest.approx(made["query"]["score"], rel=1e-9)
    assert isinstance(body["rules"], list)
    assert len(body["terms"]) == 2
    for text, weight in body["terms"]:
        assert isinstance(text, str) and np.isfinite(weight)
    again = client.get("/api/sessions/%s/explain/%d" % (sid, idx)).json()
    assert again == body


def test_restart_resumes_from_snapshots(tmp_path):
    snap_dir = tmp_path / "snaps"
    with TestClient(create_app(snapshot_dir=snap_dir)) as client:
        made = create_toy(client, budget=3, seed=0)
        sid = made["session_id"]
        resp = client.post("/api/sessions/%s/label" % sid,
                           json={"index": made["query"]["index"], "label": 1})
        next_idx = resp.json()["next_query"]["index"]

    # a fresh app over the same snapshot directory picks the session up
    with TestClient(create_app(snapshot_dir=snap_dir)) as client:
        body = client.get("/api/sessions/%s" % sid).json()
        assert body["t"] == 1
        assert body["pending"]["index"] == next_idx
        resp = client.post("/api/sessions/%s/label" % sid,
                           json={"index": next_idx, "label": -1})
        assert resp.status_code == 200
        assert resp.json()["t"] == 2


def test_dataset_listing(tmp_path):
    extra = tmp_path / "data"
    extra.mkdir()
    (extra / "probe.csv").write_text(small_csv())
    (extra / "broken.csv").write_text("not,a,header\n1,2")
    app = create_app(snapshot_dir=tmp_path / "snaps", dataset_dir=extra)
    with TestClient(app) as client:
        body = client.get("/api/datasets").json()
        rows = {r["id"]: r for r in body["datasets"]}
        assert {"toy", "abalone", "yeast", "probe"} <= set(rows)
        assert "broken" not in rows
        assert rows["toy"]["d"] == 2 and rows["toy"]["n"] == 515
        assert rows["abalone"]["n"] == 1920 and rows["abalone"]["d"] == 9
        assert rows["probe"]["n"] == 40 and rows["probe"]["anomalies"] == 4

        # an uploaded-by-name dataset can start a session
        resp = client.post("/api/sessions", json={
            "dataset": "probe", "config": {"budget": 1, "seed": 0}})
        assert resp.status_code == 200


def test_cross_origin_browser_clients_are_allowed(client):
    res = client.get("/api/datasets",
                     headers={"Origin": "http://localhost:5173"})
    assert res.status_code == 200
    assert res.headers["access-control-allow-origin"] == "*"

    # preflight for the label POST
    res = client.options("/api/sessions/abc/label", headers={
        "Origin": "http://localhost:5173",
        "Access-Control-Request-Method": "POST",
        "Access-Control-Request-Headers": "content-type",
    })
    assert res.status_code == 200
    assert res.headers["access-control-allow-origin"] == "*"
