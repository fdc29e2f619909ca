import pytest
from fastapi.testclient import TestClient

from dbstudio.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def doc_id(client, example_text, dbd_text):
    resp = client.post("/api/documents", json={"db": example_text, "dbd": dbd_text})
    assert resp.status_code == 201
    return resp.json()["id"]


def test_health(client):
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_open_clean(client, example_text, dbd_text):
    resp = client.post("/api/documents", json={"db": example_text, "dbd": dbd_text})
    body = resp.json()
    assert resp.status_code == 201
    assert body["diagnostics"] == []
    assert body["revision"] == 0


def test_open_malformed_db_still_201(client, dbd_text):
    resp = client.post("/api/documents", json={"db": "garbage {", "dbd": dbd_text})
    assert resp.status_code == 201
    assert any(d["code"] == "SyntaxError" for d in resp.json()["diagnostics"])


def test_open_empty_dbd_422(client, example_text):
    resp = client.post("/api/documents", json={"db": example_text, "dbd": "# nothing"})
    assert resp.status_code == 422


def test_open_malformed_envelope_400(client):
    assert client.post("/api/documents", json={"nope": 1}).status_code == 400
    assert client.post("/api/documents", json=[1, 2]).status_code == 400
    assert client.post("/api/documents",
                       content=b"\x00{not json",
                       headers={"content-type": "application/json"}).status_code == 400


def test_root_view(client, doc_id):
    resp = client.get(f"/api/documents/{doc_id}/view")
    assert resp.status_code == 200
    view = resp.json()
    assert len(view["records"]) == 2
    ai001 = next(r for r in view["records"] if r["name"] == "ai001")
    assert ai001["nonDefaultFields"] == [{"name": "INP", "value": "ao001"}]
    assert (ai001["x"], ai001["y"]) == (2241, 2345)
    inp = next(n for n in ai001["fieldNodes"] if n["field"] == "INP")
    assert inp["kind"] == "INPUT" and inp["color"] == 16711731
    assert len(view["links"]) == 1
    link = view["links"][0]
    assert link["targetLabel"] == "ao001.VAL"
    assert link["waypoints"] == [{"id": "ai001/INP", "x": 2505, "y": 2495}]
    assert link["broken"] is False


def test_group_view(client, dbd_text):
    db = ("record(ao,ao001) {\n}\nrecord(ao,grp1:ao001) {\n}\n"
          "record(ao,grp1:grp2:ao002) {\n}\n")
    doc_id = client.post("/api/documents",
                         json={"db": db, "dbd": dbd_text}).json()["id"]
    view = client.get(f"/api/documents/{doc_id}/view", params={"group": "grp1"}).json()
    assert [r["name"] for r in view["records"]] == ["grp1:ao001"]
    assert [(g["name"], g["memberCount"]) for g in view["subgroups"]] == [("grp2", 1)]


def test_view_unknown_id(client):
    assert client.get("/api/documents/nope/view").status_code == 404


def test_command_flow(client, doc_id):
    resp = client.post(f"/api/documents/{doc_id}/commands",
                       json={"kind": "MoveRecord", "name": "ai001", "dx": 10, "dy": 0})
    assert resp.status_code == 200
    assert resp.json()["revision"] == 1
    view = client.get(f"/api/documents/{doc_id}/view").json()
    ai001 = next(r for r in view["records"] if r["name"] == "ai001")
    assert ai001["x"] == 2251


def test_command_validation_409(client, doc_id):
    resp = client.post(f"/api/documents/{doc_id}/commands",
                       json={"kind": "CreateRecord", "type": "ai", "name": "ai001"})
    assert resp.status_code == 409
    assert resp.json()["code"] == "NameCollision"
    view = client.get(f"/api/documents/{doc_id}/view").json()
    assert view["revision"] == 0


def test_command_malformed_400(client, doc_id):
    url = f"/api/documents/{doc_id}/commands"
    assert client.post(url, json={"kind": "NoSuchCommand"}).status_code == 400
    assert client.post(url, json={"kind": "MoveRecord"}).status_code == 400
    assert client.post(url, content=b"not json",
                       headers={"content-type": "application/json"}).status_code == 400
    assert client.post(url, json="string").status_code == 400


def test_rename_updates_target_label(client, doc_id):
    resp = client.post(f"/api/documents/{doc_id}/commands",
                       json={"kind": "RenameRecord", "old": "ao001", "new": "ao002"})
    assert resp.status_code == 200
    view = client.get(f"/api/documents/{doc_id}/view").json()
    assert view["links"][0]["targetLabel"] == "ao002.VAL"


def test_undo_redo_flow(client, doc_id):
    url = f"/api/documents/{doc_id}"
    assert client.post(f"{url}/undo").status_code == 409
    before = client.get(f"{url}/view").json()
    client.post(f"{url}/commands",
                json={"kind": "MoveRecord", "name": "ai001", "dx": 5, "dy": 5})
    after = client.get(f"{url}/view").json()
    assert client.post(f"{url}/undo").status_code == 200
    restored = client.get(f"{url}/view").json()
    assert restored["records"] == before["records"]
    assert client.post(f"{url}/redo").status_code == 200
    again = client.get(f"{url}/view").json()
    assert again["records"] == after["records"]
    assert client.post(f"{url}/redo").status_code == 409


def test_source_untouched_identity(client, doc_id, example_text):
    resp = client.get(f"/api/documents/{doc_id}/source")
    assert resp.status_code == 200
    assert resp.text == example_text
    assert resp.headers["content-type"].startswith("text/plain")


def test_source_after_move(client, doc_id, example_text):
    client.post(f"/api/documents/{doc_id}/commands",
                json={"kind": "MoveRecord", "name": "ai001", "dx": 10, "dy": 0})
    text = client.get(f"/api/documents/{doc_id}/source").text
    assert '#! Record(ai001,2251,2345,0,1,"ai001")' in text


def test_revision_conflict(client, doc_id):
    resp = client.post(f"/api/documents/{doc_id}/commands",
                       json={"kind": "MoveRecord", "name": "ai001",
                             "dx": 1, "dy": 1, "expectedRevision": 99})
    assert resp.status_code == 409
    assert resp.json()["code"] == "RevisionConflict"


def test_revision_monotonic(client, doc_id):
    url = f"/api/documents/{doc_id}"
    rev = 0
    for _ in range(3):
        resp = client.post(f"{url}/commands",
                           json={"kind": "MoveRecord", "name": "ai001", "dx": 1, "dy": 0})
        assert resp.json()["revision"] == rev + 1
        rev += 1
    # failed mutation leaves the revision unchanged
    client.post(f"{url}/commands", json={"kind": "DeleteRecord", "name": "none"})
    assert client.get(f"{url}/view").json()["revision"] == rev


def test_unknown_session_404_everywhere(client):
    assert client.post("/api/documents/x/commands", json={"kind": "k"}).status_code == 404
    assert client.post("/api/documents/x/undo").status_code == 404
    assert client.post("/api/documents/x/redo").status_code == 404
    assert client.get("/api/documents/x/source").status_code == 404


def test_default_registry(example_text, registry):
    client = TestClient(create_app(default_registry=registry))
    resp = client.post("/api/documents", json={"db": example_text})
    assert resp.status_code == 201
