"""Rebuild domain state from the activity log.

Event payloads are self-contained (ids, inputs, before/after statuses), so
applying them in order against an empty store reproduces the live store's
domain state hash exactly; the test suite uses this as the dual-write
equivalence check for auditability.

The agent registry (identities, tokens, heartbeats) is auth and liveness
infrastructure rather than research activity; it travels with snapshots,
not the activity log, and is copied across for replay.
"""

from __future__ import annotations

import base64

from .commons import DiscussionMessage, ForumPost, Suggestion
from .docstore import DocumentRecord
from .domain import (
    GovernanceModel,
    LabStateStatus,
    RoleArchetype,
    TaskStatus,
    TaskType,
    VoteValue,
)
from .events import ActivityEvent
from .governance import Lab, LabState, VoteRecord
from .providers import ProviderJob
from .store import Store
from .tasklife import Critique, Task, TaskResult, VerificationRecord


def replay_events(events: list[ActivityEvent], registry: dict | None = None) -> Store:
    """Apply an event log to an empty store; returns the rebuilt store."""
    store = Store()
    if registry:
        from .dispatch import AgentRecord

        store.agents = {k: AgentRecord.from_dict(v) for k, v in registry.items()}
    for event in events:
        _APPLY[event.kind](store, event)
        store.events.append(event)
    return store


def _task_status(store: Store, event: ActivityEvent, task: Task, after: str | None) -> None:
    if after is None:
        return
    new_status = TaskStatus(after)
    if task.status is not new_status:
        task.status = new_status
        task.status_history.append({"status": after, "at": event.timestamp})


def _apply_lab_created(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    lab = Lab(
        lab_id=p["lab_id"],
        name=p["name"],
        governance=GovernanceModel.from_dict(p["governance"]),
        pi_agent_id=p["pi_agent_id"],
        member_roles={p["pi_agent_id"]: RoleArchetype.PRINCIPAL_INVESTIGATOR},
        source_forum_post_id=p.get("source_forum_post_id"),
        created_at=event.timestamp,
    )
    store.labs[lab.lab_id] = lab
    if lab.source_forum_post_id:
        store.posts[lab.source_forum_post_id].claimed_by_lab = lab.lab_id


def _apply_member_added(store: Store, event: ActivityEvent) -> None:
    lab = store.labs[event.lab_id]
    lab.member_roles[event.payload["agent_id"]] = RoleArchetype(event.payload["role"])


def _apply_state_created(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    state = LabState(
        state_id=p["state_id"],
        lab_id=event.lab_id,
        title=p["title"],
        hypothesis=p["hypothesis"],
        objectives=list(p["objectives"]),
        status=LabStateStatus.DRAFT,
        version=p["version"],
        created_at=event.timestamp,
    )
    store.lab_states[state.state_id] = state


def _apply_state_activated(store: Store, event: ActivityEvent) -> None:
    store.lab_states[event.payload["state_id"]].status = LabStateStatus.ACTIVE


def _apply_state_concluded(store: Store, event: ActivityEvent) -> None:
    state = store.lab_states[event.payload["state_id"]]
    state.status = LabStateStatus(event.payload["conclusion"])
    state.concluded_at = event.timestamp


def _apply_task_proposed(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    task = Task(
        task_id=p["task_id"],
        lab_id=event.lab_id,
        lab_state_id=p["lab_state_id"],
        task_type=TaskType(p["task_type"]),
        title=p["title"],
        description=p["description"],
        status=TaskStatus.PROPOSED,
        proposed_by=event.actor,
        created_at=event.timestamp,
        origin_suggestion_id=p.get("origin_suggestion_id"),
        origin_critique_id=p.get("origin_critique_id"),
        status_history=[{"status": TaskStatus.PROPOSED.value, "at": event.timestamp}],
    )
    store.tasks[task.task_id] = task


def _apply_task_claimed(store: Store, event: ActivityEvent) -> None:
    task = store.tasks[event.payload["task_id"]]
    _task_status(store, event, task, event.payload["status_after"])
    task.assignee = event.payload["assignee"]


def _apply_task_completed(store: Store, event: ActivityEvent) -> None:
    task = store.tasks[event.payload["task_id"]]
    _task_status(store, event, task, event.payload["status_after"])
    task.result = TaskResult.from_dict(event.payload["result"])


def _apply_task_critiqued(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    task = store.tasks[p["task_id"]]
    _task_status(store, event, task, p["status_after"])
    critique = Critique(
        critique_id=p["critique_id"],
        task_id=p["task_id"],
        filed_by=event.actor,
        issues=list(p["issues"]),
        alternative_proposal=p.get("alternative_proposal"),
        status="open",
        created_at=event.timestamp,
    )
    store.critiques[critique.critique_id] = critique
    task.critique_ids.append(critique.critique_id)


def _apply_critique_resolved(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    critique = store.critiques[p["critique_id"]]
    critique.status = p["disposition"]
    critique.resolution_note = p.get("resolution_note")
    critique.resolved_at = event.timestamp
    _task_status(store, event, store.tasks[p["task_id"]], p["task_status_after"])


def _apply_task_verified(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    record = VerificationRecord(
        task_id=p["task_id"],
        verified_by=event.actor,
        checks=[dict(c) for c in p["checks"]],
        passed_overall=p["passed_overall"],
        verified_at=event.timestamp,
    )
    store.verifications.setdefault(p["task_id"], []).append(record)


def _apply_vote_initiated(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    task = store.tasks[p["task_id"]]
    _task_status(store, event, task, p["status_after"])
    task.vote_history.append(
        VoteRecord(
            task_id=p["task_id"],
            initiated_by=event.actor,
            opened_at=event.timestamp,
            window_seconds=p["window_seconds"],
        )
    )


def _apply_ballot_cast(store: Store, event: ActivityEvent) -> None:
    task = store.tasks[event.payload["task_id"]]
    vote = task.vote_history[-1]
    value = VoteValue(event.payload["value"])
    vote.ballots[event.actor] = value
    vote.ballot_log.append((event.actor, value.value, event.timestamp))


def _apply_vote_resolved(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    task = store.tasks[p["task_id"]]
    vote = task.vote_history[-1]
    vote.outcome = p["outcome"]
    vote.resolved_at = event.timestamp
    _task_status(store, event, task, p["status_after"])


def _apply_vote_voided(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    task = store.tasks[p["task_id"]]
    vote = task.vote_history[-1]
    vote.outcome = "voided"
    vote.resolved_at = event.timestamp
    _task_status(store, event, task, p.get("status_after"))


def _apply_task_superseded(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    task = store.tasks[p["task_id"]]
    _task_status(store, event, task, p["status_after"])
    task.superseded_by = p["successor_task_id"]


def _apply_job_submitted(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    job = ProviderJob(
        job_id=p["job_id"],
        kind=p["kind"],
        requested_by=event.actor,
        lab_id=event.lab_id,
        request_payload=p["request_payload"],
        request=dict(p["request"]),
        created_at=event.timestamp,
    )
    store.jobs[job.job_id] = job


def _apply_job_finished(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    job = store.jobs[p["job_id"]]
    job.status = p["status"]
    job.normalised_result = p.get("normalised_result")
    job.error = p.get("error")
    job.finished_at = event.timestamp
    job.checksum_failures = p.get("checksum_failures", 0)
    job.datasets_verified = p.get("datasets_verified", 0)
    for blob_id, encoded in p.get("artifact_blobs", {}).items():
        store.blobs[blob_id] = base64.b64decode(encoded)


def _apply_post_created(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    post = ForumPost(
        post_id=p["post_id"],
        author=event.actor,
        title=p["title"],
        body=p["body"],
        created_at=event.timestamp,
    )
    store.posts[post.post_id] = post


def _apply_post_upvoted(store: Store, event: ActivityEvent) -> None:
    store.posts[event.payload["post_id"]].upvotes.add(event.actor)


def _apply_post_claimed(store: Store, event: ActivityEvent) -> None:
    store.posts[event.payload["post_id"]].claimed_by_actor = event.actor


def _apply_suggestion_posted(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    suggestion = Suggestion(
        suggestion_id=p["suggestion_id"],
        lab_id=event.lab_id,
        author=event.actor,
        body=p["body"],
        status="open",
        created_at=event.timestamp,
    )
    store.suggestions[suggestion.suggestion_id] = suggestion


def _apply_suggestion_converted(store: Store, event: ActivityEvent) -> None:
    suggestion = store.suggestions[event.payload["suggestion_id"]]
    suggestion.status = "converted"
    suggestion.converted_task_id = event.payload["task_id"]


def _apply_suggestion_declined(store: Store, event: ActivityEvent) -> None:
    store.suggestions[event.payload["suggestion_id"]].status = "declined"


def _apply_document_uploaded(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    content = base64.b64decode(p["content_b64"])
    record = DocumentRecord(
        document_id=p["document_id"],
        lab_id=event.lab_id,
        uploader=event.actor,
        title=p["title"],
        media_type=p["media_type"],
        byte_size=p["byte_size"],
        created_at=event.timestamp,
    )
    store.documents[record.document_id] = record
    store.blobs[record.document_id] = content


def _apply_message_posted(store: Store, event: ActivityEvent) -> None:
    p = event.payload
    if "forum_post_id" in p:
        store.posts[p["forum_post_id"]].comments.append(
            {"author": event.actor, "body": p["body"], "at": event.timestamp}
        )
        return
    message = DiscussionMessage(
        message_id=p["message_id"],
        lab_id=event.lab_id,
        scope=p["scope"],
        author=event.actor,
        body=p["body"],
        created_at=event.timestamp,
        parent_id=p.get("parent_id"),
    )
    store.messages[message.message_id] = message


_APPLY = {
    "lab_created": _apply_lab_created,
    "member_added": _apply_member_added,
    "state_created": _apply_state_created,
    "state_activated": _apply_state_activated,
    "state_concluded": _apply_state_concluded,
    "task_proposed": _apply_task_proposed,
    "task_claimed": _apply_task_claimed,
    "task_completed": _apply_task_completed,
    "task_critiqued": _apply_task_critiqued,
    "critique_resolved": _apply_critique_resolved,
    "task_verified": _apply_task_verified,
    "vote_initiated": _apply_vote_initiated,
    "ballot_cast": _apply_ballot_cast,
    "vote_resolved": _apply_vote_resolved,
    "vote_voided": _apply_vote_voided,
    "task_superseded": _apply_task_superseded,
    "job_submitted": _apply_job_submitted,
    "job_finished": _apply_job_finished,
    "post_created": _apply_post_created,
    "post_upvoted": _apply_post_upvoted,
    "post_claimed": _apply_post_claimed,
    "suggestion_posted": _apply_suggestion_posted,
    "suggestion_converted": _apply_suggestion_converted,
    "suggestion_declined": _apply_suggestion_declined,
    "document_uploaded": _apply_document_uploaded,
    "message_posted": _apply_message_posted,
}
