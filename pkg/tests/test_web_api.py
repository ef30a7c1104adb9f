import io
import time
import zipfile

import pytest


def guest(api):
    r = api.post("/guest")
    assert r.status_code == 200
    body = r.json()
    return {"Authorization": f"Bearer {body['token']}"}, body["user"]


def instructor(api):
    r = api.post("/login", json={"name": "teacher", "password": "teachpw"})
    assert r.status_code == 200
    body = r.json()
    assert body["user"]["role"] == "instructor"
    return {"Authorization": f"Bearer {body['token']}"}, body["user"]


def demo_id(api, headers):
    return api.get("/activities", headers=headers).json()[0]["id"]


def put_theory(api, headers, activity, name, body=""):
    content = f"theory {name} imports Main begin\n{body}end\n"
    r = api.put(f"/theories/{activity}/{name}", headers=headers, json={"content": content})
    assert r.status_code == 200, r.text
    return content


def run_check(api, headers, activity, names, timeout=15.0):
    r = api.post("/check", headers=headers, json={"activity": activity, "names": names})
    assert r.status_code == 202
    check_id = r.json()["check_id"]
    deadline = time.time() + timeout
    while time.time() < deadline:
        record = api.get(f"/check/{check_id}", headers=headers).json()
        if record["status"] == "done":
            return check_id, record
        time.sleep(0.02)
    raise TimeoutError(check_id)


def test_login_rejects_bad_credentials(api):
    assert api.post("/login", json={"name": "teacher", "password": "nope"}).status_code == 401
    assert api.post("/login", json={"name": "ghost", "password": "x"}).status_code == 401


def test_routes_require_token(api):
    assert api.get("/activities").status_code == 401
    assert api.get("/metrics", headers={"Authorization": "Bearer bogus"}).status_code == 401


def test_demo_activity_carries_rule_reference_and_keyboard(api):
    headers, _ = guest(api)
    activity = api.get(f"/activities/{demo_id(api, headers)}", headers=headers).json()
    groups = {g["group"]: g["entries"] for g in activity["rule_reference"]}
    assert "Propositional" in groups
    assert any(e["name"] == "conjI" for e in groups["Propositional"])
    inserts = {k["glyph"]: k["insert"] for k in activity["symbol_keyboard"]}
    assert inserts["∧"] == "\\<and>"
    assert activity["linter_toggle_allowed"] is True


def test_unknown_activity_404(api):
    headers, _ = guest(api)
    assert api.get("/activities/nope", headers=headers).status_code == 404


def test_theory_crud_cycle(api):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    content = put_theory(api, headers, act, "Ex1")
    got = api.get(f"/theories/{act}/Ex1", headers=headers).json()
    assert got["content"] == content
    listing = api.get(f"/theories/{act}", headers=headers).json()
    assert [d["name"] for d in listing] == ["Ex1"]
    versions = api.get(f"/theories/{act}/Ex1/versions", headers=headers).json()
    assert len(versions) == 1
    assert api.delete(f"/theories/{act}/Ex1", headers=headers).status_code == 200
    assert api.get(f"/theories/{act}/Ex1", headers=headers).status_code == 404


def test_cross_user_theory_access_forbidden(api):
    headers_a, user_a = guest(api)
    headers_b, _ = guest(api)
    act = demo_id(api, headers_a)
    put_theory(api, headers_a, act, "Mine")
    r = api.get(f"/theories/{act}/Mine", headers=headers_b, params={"owner": user_a["id"]})
    assert r.status_code == 403
    r = api.get(f"/theories/{act}", headers=headers_b, params={"owner": user_a["id"]})
    assert r.status_code == 403
    # instructors may inspect for course management
    iheaders, _ = instructor(api)
    r = api.get(f"/theories/{act}/Mine", headers=iheaders, params={"owner": user_a["id"]})
    assert r.status_code == 200


def test_invalid_theory_name_400(api):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    r = api.put(f"/theories/{act}/Bad", headers=headers, json={"content": "theory Mismatch imports Main begin end"})
    assert r.status_code == 400


def test_lint_endpoint_combines_structure_and_linter(api):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    r = api.post(
        "/lint",
        headers=headers,
        json={"activity": act, "content": 'theory X imports Main begin\nlemma "(A"\nby auto\nend\n'},
    )
    sources = {d["source"] for d in r.json()["diagnostics"]}
    assert sources == {"structure", "linter"}


def test_check_round_trip_and_refetch(api):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    put_theory(api, headers, act, "Ex1", '(*MOCK:error 2 "Type unification failed"*)\n')
    check_id, record = run_check(api, headers, act, ["Ex1"])
    assert record["result"]["verdict"] == "finished"
    errors = [d for d in record["result"]["diagnostics"] if d["severity"] == "error"]
    assert len(errors) == 1 and errors[0]["range"]["line"] == 2
    again = api.get(f"/check/{check_id}", headers=headers).json()
    assert again == record  # idempotent re-fetch after a (simulated) drop


def test_check_of_unknown_document_404(api):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    r = api.post("/check", headers=headers, json={"activity": act, "names": ["Missing"]})
    assert r.status_code == 404


def test_foreign_check_id_is_hidden(api):
    headers_a, _ = guest(api)
    headers_b, _ = guest(api)
    act = demo_id(api, headers_a)
    put_theory(api, headers_a, act, "Priv")
    check_id, _ = run_check(api, headers_a, act, ["Priv"])
    assert api.get(f"/check/{check_id}", headers=headers_b).status_code == 404


def test_websocket_pushes_progress_then_result(api):
    headers, user = guest(api)
    act = demo_id(api, headers)
    put_theory(api, headers, act, "Live")
    token = headers["Authorization"].split(" ")[1]
    with api.websocket_connect(f"/ws?token={token}") as ws:
        assert ws.receive_json()["type"] == "hello"
        r = api.post("/check", headers=headers, json={"activity": act, "names": ["Live"]})
        assert r.status_code == 202
        check_id = r.json()["check_id"]
        kinds = []
        while True:
            message = ws.receive_json()
            kinds.append(message["type"])
            if message["type"] == "result":
                assert message["check_id"] == check_id
                assert message["verdict"] == "finished"
                break
        assert "progress" in kinds and kinds[-1] == "result"
        ws.send_json({"type": "ping"})
        assert ws.receive_json()["type"] == "pong"


def test_websocket_rejects_bad_token(api):
    from starlette.websockets import WebSocketDisconnect

    with pytest.raises(WebSocketDisconnect):
        with api.websocket_connect("/ws?token=bogus") as ws:
            ws.receive_json()


def test_export_is_instructor_only_and_importable(api, tmp_path):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    put_theory(api, headers, act, "Logme")
    run_check(api, headers, act, ["Logme"])
    assert api.get("/export", headers=headers).status_code == 403
    iheaders, _ = instructor(api)
    r = api.get("/export", headers=iheaders)
    assert r.status_code == 200
    lines = r.text.strip().splitlines()
    from proofbench.telemetry import read_export

    events = read_export(iter(lines))
    assert any(e.kind.value == "check-submitted" for e in events)


def test_metrics_shape_and_timing_split(api):
    headers, _ = guest(api)
    api.platform.embedded_mock.default_latency = 0.15
    act = demo_id(api, headers)
    put_theory(api, headers, act, "Metric")
    _, record = run_check(api, headers, act, ["Metric"])
    m = api.get("/metrics", headers=headers).json()
    assert m["checks"]["count"] >= 1
    assert m["memory"]["rss_mb"] > 0
    last = m["recent_checks"][-1]
    total = last["server_handling"] + last["prover_wait"]
    assert last["prover_wait"] >= 0.15
    assert last["server_handling"] < total


def test_instructor_can_update_activity_students_cannot(api):
    headers, _ = guest(api)
    iheaders, _ = instructor(api)
    act_cfg = {
        "id": "new-activity",
        "title": "New",
        "exercises": [{"pattern": "W*"}],
        "linter": {"builtins": ["no-automation"]},
        "rule_reference": [],
        "symbol_keyboard": [{"glyph": "∀", "insert": "\\<forall>"}],
    }
    assert api.post("/activities", headers=headers, json=act_cfg).status_code == 403
    assert api.post("/activities", headers=iheaders, json=act_cfg).status_code == 200
    assert api.get("/activities/new-activity", headers=headers).status_code == 200


def test_activity_with_bad_pattern_rejected(api):
    iheaders, _ = instructor(api)
    bad = {"id": "broken", "title": "b", "linter": {"rules": [{"id": "r", "pattern": "(["}]}}
    r = api.post("/activities", headers=iheaders, json=bad)
    assert r.status_code == 400


def test_archive_download_and_upload(api):
    headers, _ = guest(api)
    act = demo_id(api, headers)
    put_theory(api, headers, act, "Zip1")
    put_theory(api, headers, act, "Zip2")
    r = api.get(f"/archive/{act}", headers=headers)
    assert r.status_code == 200
    names = zipfile.ZipFile(io.BytesIO(r.content)).namelist()
    assert sorted(names) == ["Zip1.thy", "Zip2.thy"]

    other_headers, _ = guest(api)
    r = api.post(f"/archive/{act}", headers=other_headers, content=r.content)
    assert sorted(r.json()["imported"]) == ["Zip1", "Zip2"]
    assert api.get(f"/theories/{act}/Zip1", headers=other_headers).status_code == 200
