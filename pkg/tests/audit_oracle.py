"""Test-side reconciliation oracle for the activity log.

Derives, purely from the final entity state, how many events of each kind
the run must have emitted.  Comparing this against the actual log catches
both missing emissions (a mutation that forgot its event) and double
emissions, without trusting any counter maintained by the emission path.
"""

from __future__ import annotations

from agentlab.domain import LabStateStatus, TaskStatus
from agentlab.store import Store

CONCLUSIONS = {
    LabStateStatus.PROVEN,
    LabStateStatus.DISPROVEN,
    LabStateStatus.PIVOTED,
    LabStateStatus.INCONCLUSIVE,
}


def expected_event_counts(store: Store) -> dict[str, int]:
    counts: dict[str, int] = {}

    def add(kind: str, n: int) -> None:
        if n:
            counts[kind] = counts.get(kind, 0) + n

    add("lab_created", len(store.labs))
    add("member_added", sum(len(lab.member_roles) - 1 for lab in store.labs.values()))
    add("state_created", len(store.lab_states))
    add(
        "state_activated",
        sum(1 for s in store.lab_states.values() if s.status is not LabStateStatus.DRAFT),
    )
    add(
        "state_concluded",
        sum(1 for s in store.lab_states.values() if s.status in CONCLUSIONS),
    )

    add("task_proposed", len(store.tasks))
    add("task_claimed", sum(1 for t in store.tasks.values() if t.assignee is not None))
    add(
        "task_completed",
        sum(
            1
            for t in store.tasks.values()
            if any(h["status"] == TaskStatus.COMPLETED.value for h in t.status_history)
        ),
    )
    add("task_critiqued", len(store.critiques))
    add(
        "critique_resolved",
        sum(1 for c in store.critiques.values() if c.status != "open"),
    )
    add("task_verified", sum(len(records) for records in store.verifications.values()))
    votes = [v for t in store.tasks.values() for v in t.vote_history]
    add("vote_initiated", len(votes))
    add("ballot_cast", sum(len(v.ballot_log) for v in votes))
    add("vote_resolved", sum(1 for v in votes if v.outcome in ("accepted", "rejected")))
    add("vote_voided", sum(1 for v in votes if v.outcome == "voided"))
    add(
        "task_superseded",
        sum(1 for t in store.tasks.values() if t.status is TaskStatus.SUPERSEDED),
    )

    add("job_submitted", len(store.jobs))
    add(
        "job_finished",
        sum(1 for j in store.jobs.values() if j.status in ("succeeded", "failed")),
    )

    add("post_created", len(store.posts))
    add("post_upvoted", sum(len(p.upvotes) for p in store.posts.values()))
    add(
        "post_claimed",
        sum(1 for p in store.posts.values() if p.claimed_by_actor is not None),
    )
    add("suggestion_posted", len(store.suggestions))
    add(
        "suggestion_converted",
        sum(1 for s in store.suggestions.values() if s.status == "converted"),
    )
    add(
        "suggestion_declined",
        sum(1 for s in store.suggestions.values() if s.status == "declined"),
    )
    add("document_uploaded", len(store.documents))
    add(
        "message_posted",
        len(store.messages) + sum(len(p.comments) for p in store.posts.values()),
    )
    return counts


def actual_event_counts(store: Store) -> dict[str, int]:
    counts: dict[str, int] = {}
    for event in store.events:
        counts[event.kind] = counts.get(event.kind, 0) + 1
    return counts
