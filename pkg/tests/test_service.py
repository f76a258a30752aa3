"""Workspace-service HTTP contract."""
from __future__ import annotations

import threading
import time

import pytest
from fastapi.testclient import TestClient

from storyloom.gateway import MockGateway, RefusalError, ReplayGateway
from storyloom.service import create_app

from conftest import ALICE_TEXT


@pytest.fixture
def client(tmp_path, alice_fixture):
    app = create_app(data_dir=tmp_path / "data", gateway=ReplayGateway(dict(alice_fixture)))
    with TestClient(app) as test_client:
        yield test_client


def make_project(client, text=ALICE_TEXT):
    response = client.post("/projects", json={"name": "alice", "text": text})
    assert response.status_code == 200
    return response.json()["id"]


def wait_job(client, project_id, job_id, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/projects/{project_id}/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.01)
    raise TimeoutError("job did not finish")


def refresh(client, project_id, incremental=False):
    suffix = "refresh-incremental" if incremental else "refresh"
    response = client.post(f"/projects/{project_id}/{suffix}")
    assert response.status_code == 202
    return wait_job(client, project_id, response.json()["jobId"])


class TestProjectsAndText:
    def test_create_then_get(self, client):
        project_id = make_project(client)
        doc = client.get(f"/projects/{project_id}").json()
        assert doc["text"] == ALICE_TEXT
        assert doc["model"]["stale"] is True  # text present, nothing extracted

    def test_unknown_project_404(self, client):
        assert client.get("/projects/nope").status_code == 404

    def test_put_text_marks_stale(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        assert client.get(f"/projects/{project_id}/model").json()["stale"] is False
        response = client.put(
            f"/projects/{project_id}/text", json={"text": ALICE_TEXT + " More."}
        )
        assert response.status_code == 200
        assert response.json()["stale"] is True
        assert client.get(f"/projects/{project_id}/model").json()["stale"] is True

    def test_put_project_round_trip(self, client):
        project_id = make_project(client)
        doc = client.get(f"/projects/{project_id}").json()
        assert client.put(f"/projects/{project_id}", json=doc).status_code == 200
        assert client.get(f"/projects/{project_id}").json() == doc


class TestRefreshAndViews:
    def test_full_refresh_populates_model(self, client):
        project_id = make_project(client)
        job = refresh(client, project_id)
        assert job["status"] == "done"
        assert job["result"]["requests"] == 7  # 1 entities + 1 locations + 5 sentences
        model = client.get(f"/projects/{project_id}/model").json()
        assert [e["name"] for e in model["entities"]] == [
            "Alice", "sister", "book", "White Rabbit",
        ]
        assert model["stale"] is False

    def test_sse_emits_sentence_events_plus_terminal(self, client):
        project_id = make_project(client)
        response = client.post(f"/projects/{project_id}/refresh")
        job_id = response.json()["jobId"]
        events = []
        with client.stream("GET", f"/projects/{project_id}/jobs/{job_id}/events") as stream:
            for line in stream.iter_lines():
                if line.startswith("event: "):
                    events.append(line.removeprefix("event: "))
        assert events.count("progress") == 5
        assert events[-1] == "done"
        assert len(events) == 6

    def test_builtin_view_endpoint(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        view = client.get(f"/projects/{project_id}/view/entities_actions").json()
        assert len(view["edges"]) == 5
        grouped = client.get(
            f"/projects/{project_id}/view/entities_actions", params={"grouped": "true"}
        ).json()
        assert sum(e["count"] for e in grouped["edges"]) == 5

    def test_expression_view_endpoint(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        view = client.post(
            f"/projects/{project_id}/view",
            json={"expr": "time |> unfold(characters) |> connect(events)"},
        ).json()
        assert view["lanes"]

    def test_invalid_expression_is_422_with_position(self, client):
        project_id = make_project(client)
        response = client.post(
            f"/projects/{project_id}/view", json={"expr": "characters |> position(events)"}
        )
        assert response.status_code == 422
        assert "location or space" in response.json()["detail"]


class TestEditsFlow:
    def move_book_intent(self, client, project_id):
        model = client.get(f"/projects/{project_id}/model").json()
        book = next(e["id"] for e in model["entities"] if e["name"] == "book")
        bank = next(l["id"] for l in model["locations"] if l["name"] == "bank")
        field = next(l["id"] for l in model["locations"] if l["name"] == "field")
        return {"type": "move_entity", "entityId": book, "fromLocation": bank,
                "toLocation": field}

    def test_edit_job_parks_pending_change(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        intent = self.move_book_intent(client, project_id)
        response = client.post(f"/projects/{project_id}/edits", json={"intent": intent})
        assert response.status_code == 202
        job = wait_job(client, project_id, response.json()["jobId"])
        assert job["status"] == "done"
        runs = job["result"]["pendingChange"]["runs"]
        assert any(r["op"] == "insert" for r in runs)
        pending = client.get(f"/projects/{project_id}/changes").json()["pendingChange"]
        assert pending["runs"] == runs

    def test_resolve_accept_all_commits_snapshot(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        history_before = client.get(f"/projects/{project_id}/history").json()
        intent = self.move_book_intent(client, project_id)
        job_id = client.post(
            f"/projects/{project_id}/edits", json={"intent": intent}
        ).json()["jobId"]
        wait_job(client, project_id, job_id)
        response = client.post(
            f"/projects/{project_id}/changes/resolve", json={"decisions": "accept_all"}
        )
        assert response.status_code == 200
        assert response.json()["stale"] is True  # stale until refresh
        history_after = client.get(f"/projects/{project_id}/history").json()
        assert len(history_after["snapshots"]) == len(history_before["snapshots"]) + 1

    def test_rewrite_from_visuals_flow(self, tmp_path, alice_fixture):
        rewritten = "A fresh telling. " + ALICE_TEXT
        gateway = MockGateway().add(purpose="edit", payload={"text": rewritten})

        class Router:
            def complete_structured(self, prompt):
                if prompt.purpose == "edit":
                    return gateway.complete_structured(prompt)
                return ReplayGateway(dict(alice_fixture)).complete_structured(prompt)

        app = create_app(data_dir=tmp_path / "rw", gateway=Router())
        with TestClient(app) as client:
            project_id = make_project(client)
            refresh(client, project_id)
            response = client.post(f"/projects/{project_id}/rewrite-from-visuals", json={})
            assert response.status_code == 202
            job = wait_job(client, project_id, response.json()["jobId"])
            assert job["status"] == "done"
            client.post(
                f"/projects/{project_id}/changes/resolve", json={"decisions": "accept_all"}
            )
            doc = client.get(f"/projects/{project_id}").json()
            assert doc["text"] == rewritten
            assert doc["model"]["stale"] is True

    def test_registration_commits_model_only(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        job_id = client.post(
            f"/projects/{project_id}/edits",
            json={"intent": {"type": "add_location", "name": "garden"}},
        ).json()["jobId"]
        job = wait_job(client, project_id, job_id)
        assert job["result"]["registered"] is True
        model = client.get(f"/projects/{project_id}/model").json()
        assert any(l["name"] == "garden" for l in model["locations"])
        assert model["stale"] is False

    def test_conflicting_edit_jobs_get_409(self, tmp_path, alice_fixture):
        slow_release = threading.Event()

        class SlowGateway:
            def __init__(self, inner):
                self.inner = inner

            def complete_structured(self, prompt):
                if prompt.purpose == "edit":
                    slow_release.wait(timeout=5)
                return self.inner.complete_structured(prompt)

        app = create_app(
            data_dir=tmp_path / "slow",
            gateway=SlowGateway(ReplayGateway(dict(alice_fixture))),
        )
        with TestClient(app) as client:
            project_id = make_project(client)
            refresh(client, project_id)
            intent = TestEditsFlow().move_book_intent(client, project_id)
            first = client.post(f"/projects/{project_id}/edits", json={"intent": intent})
            assert first.status_code == 202
            second = client.post(f"/projects/{project_id}/edits", json={"intent": intent})
            assert second.status_code == 409
            third = client.put(f"/projects/{project_id}/text", json={"text": "x"})
            assert third.status_code == 409
            slow_release.set()
            wait_job(client, project_id, first.json()["jobId"])

    def test_failed_edit_commits_nothing(self, tmp_path):
        gateway = MockGateway()
        gateway.add(purpose="edit", error=RefusalError("declined"))
        app = create_app(data_dir=tmp_path / "refuse", gateway=gateway)
        with TestClient(app) as client:
            project_id = make_project(client, text="Ann waves at Bob.")
            doc_before = client.get(f"/projects/{project_id}").json()
            response = client.post(
                f"/projects/{project_id}/edits",
                json={"intent": {"type": "remove_entity", "entityId": "ent-1"}},
            )
            # the model is empty (never extracted), so the intent fails fast
            job = wait_job(client, project_id, response.json()["jobId"])
            assert job["status"] == "failed"
            assert client.get(f"/projects/{project_id}").json() == doc_before


class TestHistoryAndMapping:
    def test_checkout_and_branching(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        history = client.get(f"/projects/{project_id}/history").json()
        root = history["snapshots"][0]["id"]
        response = client.post(
            f"/projects/{project_id}/history/checkout", json={"snapshotId": root}
        )
        assert response.json()["currentId"] == root
        client.put(f"/projects/{project_id}/text", json={"text": "A branch."})
        history = client.get(f"/projects/{project_id}/history").json()
        children = [s for s in history["snapshots"] if s["parentId"] == root]
        assert len(children) == 2  # refresh and the new branch

    def test_mapping_event_to_sentence(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        model = client.get(f"/projects/{project_id}/model").json()
        event = model["events"][0]
        mapping = client.get(
            f"/projects/{project_id}/mapping",
            params={"from": "event", "id": event["id"]},
        ).json()
        assert mapping["sentenceIndex"] == event["sentenceIndex"]
        span = model["sentences"][event["sentenceIndex"]]
        assert (mapping["charStart"], mapping["charEnd"]) == (
            span["charStart"], span["charEnd"],
        )

    def test_mapping_range_to_elements(self, client):
        project_id = make_project(client)
        refresh(client, project_id)
        mapping = client.get(
            f"/projects/{project_id}/mapping",
            params={"from": "range", "start": 0, "end": 10},
        ).json()
        assert mapping["sentences"] == [0]
        assert mapping["events"] == ["evt-1"]
        assert set(mapping["entities"]) == {"ent-1", "ent-2"}

    def test_mapping_validation(self, client):
        project_id = make_project(client)
        response = client.get(
            f"/projects/{project_id}/mapping", params={"from": "event"}
        )
        assert response.status_code == 422

    def test_persistence_across_restart(self, tmp_path, alice_fixture):
        data_dir = tmp_path / "persist"
        app = create_app(data_dir=data_dir, gateway=ReplayGateway(dict(alice_fixture)))
        with TestClient(app) as client:
            project_id = make_project(client)
            refresh(client, project_id)
            doc = client.get(f"/projects/{project_id}").json()
        app2 = create_app(data_dir=data_dir, gateway=None)
        with TestClient(app2) as client2:
            assert client2.get(f"/projects/{project_id}").json() == doc
