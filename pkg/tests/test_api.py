from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from agentlab import LabService, ServiceConfig
from agentlab.api import create_app
from agentlab.clock import VirtualClock
from agentlab.domain import TaskType, VoteValue
from agentlab.errors import all_error_codes

from conftest import OBSERVER_TOKEN, make_world, run_literature_task

DATA_DIR = Path(__file__).parent / "data"

PRINCIPALS = ["none", "human", "outsider", "pi", "analyst", "scout", "critic", "synthesizer"]


def build_matrix_world():
    """A fully-populated world exposing one target id per route placeholder."""
    world = make_world()
    svc = world.svc

    proposed = svc.propose_task(
        world.pi.principal, world.lab.lab_id, TaskType.LITERATURE_REVIEW, "matrix proposed"
    )
    successor = svc.propose_task(
        world.pi.principal, world.lab.lab_id, TaskType.LITERATURE_REVIEW, "matrix successor"
    )
    in_progress = svc.propose_task(
        world.pi.principal, world.lab.lab_id, TaskType.LITERATURE_REVIEW, "matrix wip"
    )
    svc.claim_task(world.scout.principal, in_progress.task_id)
    completed = run_literature_task(world, "matrix completed")
    verified = run_literature_task(world, "matrix verified")
    svc.verify_task(world.pi.principal, verified.task_id)
    voting = run_literature_task(world, "matrix voting")
    svc.verify_task(world.pi.principal, voting.task_id)
    svc.initiate_vote(world.pi.principal, voting.task_id)
    critiqued = run_literature_task(world, "matrix critiqued")
    critique = svc.file_critique(world.critic.principal, critiqued.task_id, ["concern"])
    draft_state = svc.create_state(world.pi.principal, world.lab.lab_id, "draft", "h", [])

    post = svc.create_post(world.human, "fresh post", "body")
    eligible = svc.create_post(world.human, "eligible post", "body")
    for member in (world.analyst, world.scout, world.critic):
        svc.upvote_post(member.principal, eligible.post_id)
    suggestion = svc.post_suggestion(world.human, world.lab.lab_id, "an idea")
    job = svc.submit_literature_job(
        world.scout.principal,
        world.lab.lab_id,
        {
            "research_question": "protein domain misannotation",
            "source_databases": ["arxiv"],
            "result_limit": 3,
        },
    )
    document = svc.upload_document(
        world.synthesizer.principal, world.lab.lab_id, "doc", b"# doc\n"
    )

    ids = {
        "lab": world.lab.lab_id,
        "agent": world.scout.agent_id,
        "post": post.post_id,
        "eligible_post": eligible.post_id,
        "draft_state": draft_state.state_id,
        "active_state": world.state.state_id,
        "proposed_task": proposed.task_id,
        "successor_task": successor.task_id,
        "in_progress_task": in_progress.task_id,
        "completed_task": completed.task_id,
        "verified_task": verified.task_id,
        "voting_task": voting.task_id,
        "open_critique": critique.critique_id,
        "open_suggestion": suggestion.suggestion_id,
        "job": job.job_id,
        "document": document.document_id,
    }
    tokens = {
        "none": None,
        "human": OBSERVER_TOKEN,
        "outsider": world.outsider.token,
        "pi": world.pi.token,
        "analyst": world.analyst.token,
        "scout": world.scout.token,
        "critic": world.critic.token,
        "synthesizer": world.synthesizer.token,
    }
    agent_ids = {
        "outsider": world.outsider.agent_id,
        "pi": world.pi.agent_id,
        "analyst": world.analyst.agent_id,
        "scout": world.scout.agent_id,
        "critic": world.critic.agent_id,
        "synthesizer": world.synthesizer.agent_id,
    }
    ids["pi_agent"] = world.pi.agent_id
    ids["outsider_agent"] = world.outsider.agent_id
    return world, ids, tokens, agent_ids


def route_request(route: str, ids: dict, principal: str, agent_ids: dict):
    method, _, template = route.partition(" ")
    path = template
    if "{self}" in path:
        path = path.replace("{self}", agent_ids.get(principal, agent_ids["scout"]))
    for key, value in ids.items():
        path = path.replace("{" + key + "}", value)
    bodies = {
        "POST /agents": {"display_name": "matrix-probe"},
        "POST /forum/posts": {"title": "t", "body": "b"},
        "POST /forum/posts/{post}/comments": {"body": "c"},
        "POST /labs": {"name": "matrix lab", "pi_agent_id": ids["pi_agent"]},
        "POST /labs/{lab}/members": {"agent_id": ids["outsider_agent"], "role": "scout"},
        "POST /labs/{lab}/states": {"title": "s", "hypothesis": "h", "objectives": []},
        "POST /states/{active_state}/conclude": {"conclusion": "proven"},
        "POST /labs/{lab}/tasks": {"task_type": "literature_review", "title": "matrix"},
        "POST /tasks/{in_progress_task}/complete": {"result": {"summary": "done"}},
        "POST /tasks/{completed_task}/critiques": {"issues": ["concern"]},
        "POST /critiques/{open_critique}/resolve": {"disposition": "dismissed"},
        "POST /tasks/{voting_task}/ballots": {"value": "approve"},
        "POST /tasks/{proposed_task}/supersede": {
            "successor_task_id": ids["successor_task"]
        },
        "POST /providers/literature/jobs": {
            "lab_id": ids["lab"],
            "query": {
                "research_question": "protein domain misannotation",
                "source_databases": ["arxiv"],
                "result_limit": 3,
            },
        },
        "POST /providers/analysis/jobs": {
            "lab_id": ids["lab"],
            "request": {"task_description": "quick stats"},
        },
        "POST /labs/{lab}/suggestions": {"body": "idea"},
        "POST /suggestions/{open_suggestion}/convert": {"task_type": "literature_review"},
        "POST /labs/{lab}/discussion": {"body": "hello"},
        "POST /labs/{lab}/documents": {"title": "d", "content": "text"},
    }
    return method, path, bodies.get(route, {})


def load_matrix() -> dict:
    return json.loads((DATA_DIR / "auth_matrix.json").read_text(encoding="utf-8"))


MATRIX = load_matrix()


@pytest.mark.parametrize("route", sorted(MATRIX))
def test_authorization_matrix(route):
    # every (endpoint x principal kind x member role) outcome is pinned
    expectations = MATRIX[route]
    for principal in PRINCIPALS:
        world, ids, tokens, agent_ids = build_matrix_world()
        client = TestClient(create_app(world.svc))
        method, path, body = route_request(route, ids, principal, agent_ids)
        headers = {}
        if tokens[principal] is not None:
            headers["Authorization"] = f"Bearer {tokens[principal]}"
        if method == "GET":
            response = client.get(path, headers=headers)
        else:
            response = client.post(path, headers=headers, json=body)
        assert response.status_code == expectations[principal], (
            route,
            principal,
            response.status_code,
            response.text,
        )


def test_error_code_set_is_frozen():
    frozen = json.loads((DATA_DIR / "error_codes.json").read_text(encoding="utf-8"))
    assert all_error_codes() == frozen


def make_client():
    world, ids, tokens, agent_ids = build_matrix_world()
    return world, ids, TestClient(create_app(world.svc))


def auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


def test_human_ballot_is_403_with_stable_code():
    world, ids, client = make_client()
    response = client.post(
        f"/tasks/{ids['voting_task']}/ballots",
        headers=auth(OBSERVER_TOKEN),
        json={"value": "approve"},
    )
    assert response.status_code == 403
    assert response.json()["code"] == "ObserverForbidden"


def test_non_pi_activate_is_403_notpi():
    world, ids, client = make_client()
    response = client.post(
        f"/states/{ids['draft_state']}/activate", headers=auth(world.scout.token)
    )
    assert response.status_code == 403
    assert response.json()["code"] == "NotPI"


def test_agent_reads_ordered_activity():
    world, ids, client = make_client()
    response = client.get(f"/labs/{ids['lab']}/activity", headers=auth(world.scout.token))
    assert response.status_code == 200
    events = response.json()
    assert [e["event_id"] for e in events] == sorted(e["event_id"] for e in events)
    assert all(e["lab_id"] == ids["lab"] for e in events)


def test_activity_ndjson_format():
    world, ids, client = make_client()
    response = client.get(
        f"/labs/{ids['lab']}/activity",
        params={"format": "ndjson"},
        headers=auth(world.scout.token),
    )
    assert response.status_code == 200
    lines = response.text.splitlines()
    assert lines
    for line in lines:
        json.loads(line)


def test_no_external_event_append_endpoint_exists():
    world, ids, client = make_client()
    for path in (f"/labs/{ids['lab']}/activity", "/activity", "/events"):
        response = client.post(path, headers=auth(world.pi.token), json={"kind": "forged"})
        assert response.status_code in (404, 405)
    count_before = len(world.svc.store.events)
    assert len(world.svc.store.events) == count_before


def test_unknown_ids_are_404_and_conflicts_409():
    world, ids, client = make_client()
    assert client.get("/tasks/task-999", headers=auth(world.pi.token)).status_code == 404
    response = client.post(
        f"/tasks/{ids['proposed_task']}/complete",
        headers=auth(world.scout.token),
        json={"result": {"summary": "premature"}},
    )
    assert response.status_code == 409
    assert response.json()["code"] == "IllegalTransition"


def test_invalid_payloads_are_422():
    world, ids, client = make_client()
    response = client.post(
        f"/labs/{ids['lab']}/tasks",
        headers=auth(world.pi.token),
        json={"task_type": "sorcery", "title": "x"},
    )
    assert response.status_code == 422
    assert response.json()["code"] == "InvalidRequest"
    response = client.post(
        f"/labs/{ids['lab']}/tasks", headers=auth(world.pi.token), json={"title": "x"}
    )
    assert response.status_code == 422


def test_register_returns_token_once_and_responses_never_leak_tokens():
    world, ids, client = make_client()
    response = client.post("/agents", json={"display_name": "fresh", "soul_document": "s"})
    assert response.status_code == 200
    token = response.json()["auth_token"]
    assert len(token) == 64
    overview = client.get(f"/labs/{ids['lab']}", headers=auth(token)).json()
    assert "auth_token" not in json.dumps(overview)
    work = client.get(
        f"/agents/{response.json()['agent']['agent_id']}/work", headers=auth(token)
    )
    assert work.status_code == 403  # no heartbeat yet
    assert work.json()["code"] == "StaleAgent"


def test_document_content_roundtrip_via_api():
    world, ids, client = make_client()
    body = client.get(f"/documents/{ids['document']}", headers=auth(world.pi.token)).json()
    assert body["content_text"] == "# doc\n"
    raw = client.get(
        f"/documents/{ids['document']}/content", headers=auth(world.pi.token)
    )
    assert raw.content == b"# doc\n"
    assert raw.headers["content-type"].startswith("text/markdown")


def test_protocol_document_served_as_markdown_plus_structured():
    world, ids, client = make_client()
    response = client.get(
        f"/labs/{ids['lab']}/protocol/{world.scout.agent_id}",
        headers=auth(OBSERVER_TOKEN),
    )
    assert response.status_code == 200
    doc = response.json()
    assert doc["rendered"].startswith("# Protocol:")
    assert doc["role_card"]["permitted_task_types"] == ["literature_review"]
    assert doc["heartbeat_cadence_seconds"] == 300


def test_server_restart_preserves_state_via_http(tmp_path):
    config = ServiceConfig(
        store_kind="file_backed",
        store_path=str(tmp_path / "state"),
        rng_seed=5,
        job_execution="manual",
        observer_tokens={OBSERVER_TOKEN: "watcher"},
    )
    clock = VirtualClock(9_000_000)
    service = LabService(config, clock=clock)
    client = TestClient(create_app(service))
    registered = client.post("/agents", json={"display_name": "keeper"}).json()
    token = registered["auth_token"]
    client.post(f"/agents/{registered['agent']['agent_id']}/heartbeat", headers=auth(token))
    lab = client.post("/labs", headers=auth(token), json={"name": "persistent lab"}).json()
    before = service.store.global_state_hash()
    service.close()

    revived = LabService(config, clock=clock)
    client2 = TestClient(create_app(revived))
    assert revived.store.global_state_hash() == before
    overview = client2.get(f"/labs/{lab['lab_id']}", headers=auth(token))
    assert overview.status_code == 200
    assert overview.json()["lab"]["name"] == "persistent lab"
