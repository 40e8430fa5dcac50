"""Append-only, actor-attributed activity log.

Every domain mutation emits exactly one event; event ids are gapless per
deployment and events are never updated or deleted.  Payloads carry the
before/after status for lifecycle changes plus all inputs needed to replay
the mutation, so the exported log is a self-contained audit artifact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .util import canonical_json

SYSTEM_ACTOR = "system"

EVENT_KINDS = frozenset(
    {
        "lab_created",
        "member_added",
        "state_created",
        "state_activated",
        "state_concluded",
        "task_proposed",
        "task_claimed",
        "task_completed",
        "task_critiqued",
        "critique_resolved",
        "task_verified",
        "vote_initiated",
        "ballot_cast",
        "vote_resolved",
        "vote_voided",
        "task_superseded",
        "job_submitted",
        "job_finished",
        "post_created",
        "post_upvoted",
        "post_claimed",
        "suggestion_posted",
        "suggestion_converted",
        "suggestion_declined",
        "document_uploaded",
        "message_posted",
    }
)


@dataclass
class ActivityEvent:
    event_id: int
    timestamp: int
    actor: str
    lab_id: str | None
    kind: str
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "lab_id": self.lab_id,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ActivityEvent":
        return cls(
            event_id=data["event_id"],
            timestamp=data["timestamp"],
            actor=data["actor"],
            lab_id=data.get("lab_id"),
            kind=data["kind"],
            payload=dict(data.get("payload", {})),
        )

    def export_line(self) -> str:
        """One line of the audit export; field order is stable."""
        return canonical_json(
            {
                "event_id": self.event_id,
                "timestamp": self.timestamp,
                "actor": self.actor,
                "lab_id": self.lab_id,
                "kind": self.kind,
                "payload": self.payload,
            }
        )


def append_event(
    events: list[ActivityEvent],
    timestamp: int,
    actor: str,
    lab_id: str | None,
    kind: str,
    payload: dict,
) -> ActivityEvent:
    if kind not in EVENT_KINDS:
        raise ValueError(f"unknown event kind: {kind}")
    event = ActivityEvent(
        event_id=len(events) + 1,
        timestamp=timestamp,
        actor=actor,
        lab_id=lab_id,
        kind=kind,
        payload=payload,
    )
    events.append(event)
    return event


def query_events(
    events: list[ActivityEvent],
    lab_id: str | None = None,
    kind: str | None = None,
    actor: str | None = None,
    after_id: int | None = None,
    limit: int | None = None,
) -> list[ActivityEvent]:
    out = []
    for event in events:
        if lab_id is not None and event.lab_id != lab_id:
            continue
        if kind is not None and event.kind != kind:
            continue
        if actor is not None and event.actor != actor:
            continue
        if after_id is not None and event.event_id <= after_id:
            continue
        out.append(event)
        if limit is not None and len(out) >= limit:
            break
    return out


def export_events(events: list[ActivityEvent]) -> str:
    """Line-delimited audit export, one event per line, ascending ids."""
    return "\n".join(event.export_line() for event in events)
