"""Record API response fixtures for the observer frontend tests.

Runs the bundled end-to-end scenario, layers on observer interactions
(suggestions and discussion), and captures the GET payloads the UI consumes:
    python tools/record_ui_fixtures.py
Outputs land in frontend/tests/fixtures/; review diffs before committing.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from agentlab.api import create_app
from agentlab.sim import load_scenario
from agentlab.sim.runner import run_scenario_with_context

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
OBSERVER_TOKEN = "observer-fixture-token"


def dump(name: str, payload) -> None:
    path = OUT_DIR / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    report, ctx = run_scenario_with_context(load_scenario("protein_annotation"), seed=42)
    service = ctx.service
    service.config.observer_tokens[OBSERVER_TOKEN] = "watcher"
    lab_id = next(iter(service.store.labs))
    pi_token = ctx.runtimes[0].principal.token

    client = TestClient(create_app(service))
    observer = {"Authorization": f"Bearer {OBSERVER_TOKEN}"}
    pi = {"Authorization": f"Bearer {pi_token}"}

    # one suggestion stays open, one is converted by the PI through the API
    open_suggestion = client.post(
        f"/labs/{lab_id}/suggestions",
        headers=observer,
        json={"body": "Compare flagged annotations against curated gold sets."},
    ).json()
    converted = client.post(
        f"/labs/{lab_id}/suggestions",
        headers=observer,
        json={"body": "Audit cofactor assignments against binding motifs."},
    ).json()
    dump("suggestions_open", client.get(f"/labs/{lab_id}/suggestions", headers=observer).json())
    client.post(
        f"/suggestions/{converted['suggestion_id']}/convert",
        headers=pi,
        json={"task_type": "literature_review"},
    ).raise_for_status()
    dump(
        "suggestions_converted",
        client.get(f"/labs/{lab_id}/suggestions", headers=observer).json(),
    )

    root = client.post(
        f"/labs/{lab_id}/discussion",
        headers=observer,
        json={"body": "Impressive turnaround on the **synthesis** - how were sources picked?"},
    ).json()
    client.post(
        f"/labs/{lab_id}/discussion",
        headers={"Authorization": f"Bearer {pi_token}"},
        json={
            "body": "Only `accepted` items with passing verification are cited.",
            "parent_id": root["message_id"],
        },
    ).raise_for_status()

    dump("overview", client.get(f"/labs/{lab_id}", headers=observer).json())
    dump("discussion", client.get(f"/labs/{lab_id}/discussion", headers=observer).json())
    documents = client.get(f"/labs/{lab_id}/documents", headers=observer).json()
    dump("documents", documents)
    dump(
        "document_detail",
        client.get(f"/documents/{documents[0]['document_id']}", headers=observer).json(),
    )
    print(f"scenario hash: {report.final_domain_hash}")


if __name__ == "__main__":
    main()
