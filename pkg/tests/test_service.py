import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from netforge.errors import NotFound
from netforge.frontends import import_keras
from netforge.ir import model_from_doc
from netforge.service import (
    DONE,
    FAILED,
    FileStore,
    InMemoryStore,
    JobQueue,
    PENDING,
    create_app,
)
from netforge.zoo import fixture_text

SMALL = """name: "N"
layer { name: "data" type: "Input" input_param { shape { dim: 1 dim: 3 dim: 8 dim: 8 } } }
layer { name: "c" type: "Convolution" bottom: "data" top: "c" convolution_param { num_output: 4 kernel_size: 5 } }
layer { name: "fc" type: "InnerProduct" bottom: "c" top: "fc" inner_product_param { num_output: 5 } }
"""


@pytest.fixture
def client():
    app = create_app(store=InMemoryStore(), workers=2)
    with TestClient(app) as c:
        yield c


def upload(client, source=SMALL, fmt="caffe"):
    resp = client.post("/api/models", json={"source": source, "format": fmt})
    assert resp.status_code == 200, resp.text
    return resp.json()


def wait_job(client, job_id, timeout=5.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/api/jobs/{job_id}").json()
        if doc["state"] in (DONE, FAILED):
            return doc
        time.sleep(0.01)
    raise AssertionError("job did not settle")


# ---------------------------------------------------------------- jobs unit

def test_job_queue_runs_thunks():
    q = JobQueue(workers=1)
    try:
        job = q.submit("m", "caffe", lambda: "payload")
        assert job.state == PENDING or job.state in ("running", DONE)
        q.join(timeout=2)
        got = q.get(job.job_id)
        assert got.state == DONE
        assert got.result == "payload"
        assert got.started is not None and got.finished >= got.started
    finally:
        q.shutdown()


def test_job_queue_captures_failures():
    q = JobQueue(workers=1)
    try:
        job = q.submit("m", "keras", lambda: 1 / 0)
        q.join(timeout=2)
        got = q.get(job.job_id)
        assert got.state == FAILED
        assert "ZeroDivisionError" in got.error
        assert got.result is None
    finally:
        q.shutdown()


def test_job_queue_notify_fires_once_terminal():
    seen = []
    q = JobQueue(workers=1, notify=seen.append)
    try:
        q.submit("m", "caffe", lambda: "x")
        q.join(timeout=2)
    finally:
        q.shutdown()
    assert [j.state for j in seen] == [DONE]


def test_job_queue_unknown_id():
    q = JobQueue(workers=1)
    try:
        with pytest.raises(NotFound):
            q.get("nope")
    finally:
        q.shutdown()


# ---------------------------------------------------------------- REST

def test_import_returns_id_diagnostics_layout(client):
    doc = upload(client)
    assert doc["diagnostics"] == []
    assert set(doc["layout"]) == {"positions", "paths"}
    assert set(doc["layout"]["positions"]) == {"data", "c", "fc"}


def test_import_rejects_bad_format(client):
    resp = client.post("/api/models", json={"source": SMALL, "format": "onnx"})
    assert resp.status_code == 400
    assert resp.json()["error"] == "BadRequest"


def test_import_reports_syntax_span(client):
    resp = client.post("/api/models",
                       json={"source": 'layer { name: "x', "format": "caffe"})
    assert resp.status_code == 400
    body = resp.json()
    assert body["error"] == "UnterminatedString"
    assert body["span"]["line"] == 1


def test_import_honors_size_cap():
    app = create_app(store=InMemoryStore(), workers=1, fetch_cap=64)
    with TestClient(app) as c:
        resp = c.post("/api/models", json={"source": SMALL, "format": "caffe"})
        assert resp.status_code == 413


def test_get_model_round_trips_doc(client):
    model_id = upload(client)["model_id"]
    doc = client.get(f"/api/models/{model_id}").json()
    assert doc["version"] == 0
    model = model_from_doc(doc["model"])
    assert set(model.layers) == {"data", "c", "fc"}
    assert client.get("/api/models/nope").status_code == 404


def test_export_job_lifecycle(client):
    model_id = upload(client)["model_id"]
    job_id = client.post(f"/api/models/{model_id}/export",
                         json={"target": "keras"}).json()["job_id"]
    done = wait_job(client, job_id)
    assert done["state"] == DONE
    result = client.get(f"/api/jobs/{job_id}/result")
    assert result.status_code == 200
    assert "model.json" in result.headers["content-disposition"]
    back = import_keras(result.text)
    assert set(back.layers) == {"data", "c", "fc"}


def test_export_failure_is_conflict(client):
    model_id = upload(client, source=fixture_text("alexnet"))["model_id"]
    job_id = client.post(f"/api/models/{model_id}/export",
                         json={"target": "keras"}).json()["job_id"]
    done = wait_job(client, job_id)
    assert done["state"] == FAILED
    assert "LRN" in done["error"]
    resp = client.get(f"/api/jobs/{job_id}/result")
    assert resp.status_code == 409
    assert resp.json()["error"] == "JobFailed"


def test_result_before_done_is_conflict(client):
    model_id = upload(client)["model_id"]
    slow = client.post(f"/api/models/{model_id}/export",
                       json={"target": "caffe"}).json()["job_id"]
    resp = client.get(f"/api/jobs/{slow}/result")
    assert resp.status_code in (200, 409)  # depends on worker timing
    if resp.status_code == 409:
        assert resp.json()["error"] == "JobNotDone"


def test_export_snapshots_at_submission(client):
    # mutations after submit must not leak into the exported text
    model_id = upload(client)["model_id"]
    token = client.post(f"/api/models/{model_id}/share").json()["token"]
    job_id = client.post(f"/api/models/{model_id}/export",
                         json={"target": "caffe"}).json()["job_id"]
    with client.websocket_connect(f"/ws/models/{model_id}?token={token}&user=x") as ws:
        ws.receive_json()  # snapshot
        ws.send_json({"action": "submit", "event": {
            "kind": "param_update",
            "payload": {"layer_id": "c", "key": "num_output", "new_value": 99},
            "base_version": 0}})
        ws.receive_json()
    done = wait_job(client, job_id)
    assert done["state"] == DONE
    text = client.get(f"/api/jobs/{job_id}/result").text
    assert "num_output: 4" in text and "99" not in text


def test_share_token_idempotent(client):
    model_id = upload(client)["model_id"]
    t1 = client.post(f"/api/models/{model_id}/share").json()
    t2 = client.post(f"/api/models/{model_id}/share").json()
    assert t1 == t2
    assert len(t1["token"]) == 22
    assert t1["url"] == f"/s/{t1['token']}"
    resolved = client.get(f"/s/{t1['token']}").json()
    assert resolved["model_id"] == model_id
    assert client.get("/s/bogus").status_code == 404


def test_custom_layers_flag_rides_export(client):
    model_id = upload(client, source=fixture_text("alexnet"))["model_id"]
    job_id = client.post(
        f"/api/models/{model_id}/export",
        json={"target": "keras", "custom_layers": ["LRN"]}).json()["job_id"]
    done = wait_job(client, job_id)
    assert done["state"] == DONE
    assert "LRN" in client.get(f"/api/jobs/{job_id}/result").text


# ---------------------------------------------------------------- websocket

def test_ws_requires_valid_token(client):
    model_id = upload(client)["model_id"]
    with client.websocket_connect(f"/ws/models/{model_id}?token=wrong") as ws:
        first = ws.receive_json()
        assert first["type"] == "error"
        assert first["payload"]["error"] == "Forbidden"


def test_ws_snapshot_then_events(client):
    model_id = upload(client)["model_id"]
    token = client.post(f"/api/models/{model_id}/share").json()["token"]
    url = f"/ws/models/{model_id}?token={token}"
    with client.websocket_connect(f"{url}&user=alice") as a:
        snap = a.receive_json()
        assert snap["type"] == "snapshot" and snap["version"] == 0
        with client.websocket_connect(f"{url}&user=bob") as b:
            b.receive_json()
            b.send_json({"action": "submit", "event": {
                "kind": "param_update",
                "payload": {"layer_id": "c", "key": "num_output", "new_value": 7},
                "base_version": 0}})
            got_a = a.receive_json()
            got_b = b.receive_json()
            assert got_a == got_b
            assert got_a["type"] == "event"
            assert got_a["version"] == 1
            assert got_a["payload"]["author"] == "bob"
            assert got_a["payload"]["event_id"] == 1


def test_ws_error_goes_to_origin_only(client):
    model_id = upload(client)["model_id"]
    token = client.post(f"/api/models/{model_id}/share").json()["token"]
    url = f"/ws/models/{model_id}?token={token}"
    with client.websocket_connect(f"{url}&user=alice") as a:
        a.receive_json()
        with client.websocket_connect(f"{url}&user=bob") as b:
            b.receive_json()
            b.send_json({"action": "submit", "event": {
                "kind": "revert", "payload": {}, "base_version": 0}})
            err = b.receive_json()
            assert err["type"] == "error"
            # alice saw nothing; prove it by pushing one real event after
            b.send_json({"action": "submit", "event": {
                "kind": "param_update",
                "payload": {"layer_id": "c", "key": "num_output", "new_value": 6},
                "base_version": 0}})
            assert a.receive_json()["type"] == "event"


def test_ws_malformed_payload_keeps_session_alive(client):
    model_id = upload(client)["model_id"]
    token = client.post(f"/api/models/{model_id}/share").json()["token"]
    with client.websocket_connect(
            f"/ws/models/{model_id}?token={token}&user=eve") as ws:
        ws.receive_json()
        # required field absent: must answer with an error frame, not drop
        ws.send_json({"action": "submit", "event": {
            "kind": "param_update",
            "payload": {"layer_id": "c", "key": "num_output"},
            "base_version": 0}})
        err = ws.receive_json()
        assert err["type"] == "error"
        assert err["payload"]["error"] == "MalformedDocument"
        assert "new_value" in err["payload"]["detail"]
        ws.send_json({"action": "submit", "event": {
            "kind": "param_update",
            "payload": {"layer_id": "c", "key": "num_output", "new_value": 5},
            "base_version": 0}})
        got = ws.receive_json()
        assert got["type"] == "event" and got["version"] == 1


def test_ws_comment_and_revert_actions(client):
    model_id = upload(client)["model_id"]
    token = client.post(f"/api/models/{model_id}/share").json()["token"]
    with client.websocket_connect(
            f"/ws/models/{model_id}?token={token}&user=carol") as ws:
        ws.receive_json()
        ws.send_json({"action": "comment", "anchor": "c", "text": "hm"})
        note = ws.receive_json()
        assert note["type"] == "comment"
        assert note["payload"]["author"] == "carol"
        ws.send_json({"action": "submit", "event": {
            "kind": "param_update",
            "payload": {"layer_id": "c", "key": "num_output", "new_value": 9},
            "base_version": 0}})
        ws.receive_json()
        ws.send_json({"action": "revert", "to_version": 0})
        msg = ws.receive_json()
        assert msg["payload"]["kind"] == "revert"
        ws.send_json({"action": "replay_request", "version": 1})
        snap = ws.receive_json()
        assert snap["type"] == "snapshot" and snap["version"] == 1
        model = model_from_doc(snap["payload"]["model"])
        assert model.layers["c"].params["num_output"] == 9


def test_ws_job_completion_pushed(client):
    model_id = upload(client)["model_id"]
    token = client.post(f"/api/models/{model_id}/share").json()["token"]
    with client.websocket_connect(
            f"/ws/models/{model_id}?token={token}&user=dave") as ws:
        ws.receive_json()
        job_id = client.post(f"/api/models/{model_id}/export",
                             json={"target": "caffe"}).json()["job_id"]
        push = ws.receive_json()
        assert push["type"] == "job"
        assert push["payload"]["job_id"] == job_id
        assert push["payload"]["state"] == DONE


# ---------------------------------------------------------------- stores

def test_file_store_round_trip(tmp_path):
    store = FileStore(tmp_path)
    app = create_app(store=store, workers=1)
    with TestClient(app) as c:
        model_id = upload(c)["model_id"]
        token = c.post(f"/api/models/{model_id}/share").json()["token"]
        t = c.post(f"/api/models/{model_id}/share").json()["token"]
        assert t == token
        with c.websocket_connect(
                f"/ws/models/{model_id}?token={token}&user=eve") as ws:
            ws.receive_json()
            ws.send_json({"action": "submit", "event": {
                "kind": "param_update",
                "payload": {"layer_id": "c", "key": "num_output", "new_value": 77},
                "base_version": 0}})
            ws.receive_json()
            ws.send_json({"action": "comment", "anchor": "c", "text": "check"})
            ws.receive_json()

    # a brand-new app over the same directory sees everything
    app2 = create_app(store=FileStore(tmp_path), workers=1)
    with TestClient(app2) as c2:
        doc = c2.get(f"/api/models/{model_id}").json()
        assert doc["version"] == 1
        model = model_from_doc(doc["model"])
        assert model.layers["c"].params["num_output"] == 77
        assert c2.get(f"/s/{token}").json()["model_id"] == model_id
        with c2.websocket_connect(
                f"/ws/models/{model_id}?token={token}&user=eve") as ws:
            snap = ws.receive_json()
            assert snap["version"] == 1


def test_in_memory_store_api():
    store = InMemoryStore()
    assert store.model_ids() == []
    from netforge.frontends import import_caffe
    m = import_caffe(SMALL)
    store.save_model("m1", m)
    assert store.model_ids() == ["m1"]
    loaded_model, events, comments = store.load_model("m1")
    assert set(loaded_model.layers) == set(m.layers)
    assert events == [] and comments == []
