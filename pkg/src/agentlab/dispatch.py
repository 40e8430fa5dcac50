"""Agent registration, heartbeat liveness, the autonomous pull endpoint,
and per-agent protocol-document rendering.

The server never schedules agents: polling is read-only, and an agent is
"active" exactly when its last heartbeat is at most the configured TTL old
(default 300 s, boundary inclusive).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .auth import Principal, require_agent
from .domain import (
    RoleArchetype,
    TaskStatus,
    TaskType,
    hard_bans,
    permitted_task_types,
)
from .errors import NotMember, StaleAgent
from .governance import active_state
from .tasklife import CRITIQUE_OPEN

if TYPE_CHECKING:
    from .core import LabService
    from .governance import Lab

HEARTBEAT_CADENCE_SECONDS = 300
POLL_MIN_SECONDS = 45
POLL_MAX_SECONDS = 90

PROVIDER_NORMS = (
    "All external tool calls go through the lab's provider proxy. Credentials "
    "stay server-side and are never issued to agents; every invocation is "
    "recorded as an auditable provider job."
)

ESCALATION_TRIGGERS: dict[RoleArchetype, list[str]] = {
    RoleArchetype.PRINCIPAL_INVESTIGATOR: [
        "conclude or pivot the lab state when accumulated evidence contradicts the hypothesis",
        "supersede tasks that newer results have made obsolete",
    ],
    RoleArchetype.RESEARCH_ANALYST: [
        "flag dataset integrity failures in the lab discussion before completing the analysis",
    ],
    RoleArchetype.SCOUT: [
        "surface contradictory prior art in the lab discussion as soon as it is found",
    ],
    RoleArchetype.CRITIC: [
        "file a critique when cited evidence is missing or does not support the claim",
    ],
    RoleArchetype.SYNTHESIZER: [
        "request additional reviews when accepted sources disagree",
    ],
}

DEFINITION_OF_DONE_TEXT: dict[TaskType, str] = {
    TaskType.LITERATURE_REVIEW: (
        "at least one succeeded literature provider job and a non-empty "
        "bibliography in the structured result payload"
    ),
    TaskType.ANALYSIS: (
        "at least one succeeded analysis provider job with every referenced "
        "dataset checksum verified server-side"
    ),
    TaskType.DEEP_RESEARCH: (
        "the combined evidence requirements of literature review and analysis"
    ),
    TaskType.SYNTHESIS: (
        "at least {min_sources} accepted source tasks cited and at least one "
        "document uploaded to the lab's document store"
    ),
    TaskType.CRITIQUE: (
        "a structured critique filed by the assignee and referenced from the result"
    ),
}


@dataclass
class AgentRecord:
    agent_id: str
    display_name: str
    soul_document: str
    auth_token: str
    registered_at: int
    last_heartbeat: int | None = None

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "display_name": self.display_name,
            "soul_document": self.soul_document,
            "auth_token": self.auth_token,
            "registered_at": self.registered_at,
            "last_heartbeat": self.last_heartbeat,
        }

    def public_dict(self) -> dict:
        """API-visible view; auth tokens never leave the registry."""
        return {
            "agent_id": self.agent_id,
            "display_name": self.display_name,
            "soul_document": self.soul_document,
            "registered_at": self.registered_at,
            "last_heartbeat": self.last_heartbeat,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentRecord":
        return cls(
            agent_id=data["agent_id"],
            display_name=data["display_name"],
            soul_document=data["soul_document"],
            auth_token=data["auth_token"],
            registered_at=data["registered_at"],
            last_heartbeat=data.get("last_heartbeat"),
        )


@dataclass
class WorkBundle:
    agent_id: str
    generated_at: int
    claimable_tasks: list[dict] = field(default_factory=list)
    open_votes: list[dict] = field(default_factory=list)
    open_critiques_to_resolve: list[dict] = field(default_factory=list)
    suggestions_pending: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "generated_at": self.generated_at,
            "claimable_tasks": self.claimable_tasks,
            "open_votes": self.open_votes,
            "open_critiques_to_resolve": self.open_critiques_to_resolve,
            "suggestions_pending": self.suggestions_pending,
        }


# ---------------------------------------------------------------------------
# registry operations


def register_agent(
    svc: "LabService", display_name: str, soul_document: str
) -> tuple[AgentRecord, str]:
    """Register an agent and issue its bearer token.

    Display names are not keys; every registration gets a fresh identity.
    The agent is inactive until its first heartbeat.
    """
    token = svc.tokens.new_token()
    record = AgentRecord(
        agent_id=svc.ids.next("agent"),
        display_name=display_name,
        soul_document=soul_document,
        auth_token=token,
        registered_at=svc.now(),
    )
    svc.store.agents[record.agent_id] = record
    return record, token


def heartbeat(svc: "LabService", actor: Principal) -> AgentRecord:
    agent_id = require_agent(actor)
    record = svc.store.agent(agent_id)
    record.last_heartbeat = svc.now()
    return record


def is_active(record: AgentRecord, now_ms: int, ttl_seconds: int) -> bool:
    if record.last_heartbeat is None:
        return False
    return now_ms - record.last_heartbeat <= ttl_seconds * 1000


def active_members(svc: "LabService", lab: "Lab", now_ms: int) -> int:
    ttl = svc.config.heartbeat_ttl_seconds
    return sum(
        1
        for agent_id in lab.member_roles
        if is_active(svc.store.agent(agent_id), now_ms, ttl)
    )


# ---------------------------------------------------------------------------
# the pull endpoint


def poll_work(svc: "LabService", actor: Principal) -> WorkBundle:
    """Assemble pending work for an agent across its labs.

    Read-only by contract: polling claims nothing and mutates nothing.
    """
    agent_id = require_agent(actor)
    record = svc.store.agent(agent_id)
    now = svc.now()
    if not is_active(record, now, svc.config.heartbeat_ttl_seconds):
        raise StaleAgent(f"{agent_id} must heartbeat before polling")
    bundle = WorkBundle(agent_id=agent_id, generated_at=now)
    labs = [lab for lab in svc.store.labs.values() if agent_id in lab.member_roles]
    for lab in labs:
        role = lab.member_roles[agent_id]
        current_state = active_state(svc, lab.lab_id)
        for task in svc.tasks_of_lab(lab.lab_id):
            if (
                task.status is TaskStatus.PROPOSED
                and current_state is not None
                and task.lab_state_id == current_state.state_id
                and task.task_type in permitted(role)
            ):
                bundle.claimable_tasks.append(task.summary_dict())
            elif (
                task.status is TaskStatus.VOTING
                and task.vote is not None
                and task.vote.open
                and now < task.vote.expires_at_ms()
                and agent_id not in task.vote.ballots
            ):
                bundle.open_votes.append(task.summary_dict())
        if lab.pi_agent_id == agent_id:
            for task in svc.tasks_of_lab(lab.lab_id):
                for critique_id in task.critique_ids:
                    critique = svc.store.critique(critique_id)
                    if critique.status == CRITIQUE_OPEN:
                        bundle.open_critiques_to_resolve.append(critique.to_dict())
            for suggestion in svc.store.suggestions.values():
                if suggestion.lab_id == lab.lab_id and suggestion.status == "open":
                    bundle.suggestions_pending.append(suggestion.to_dict())
    return bundle


def permitted(role: RoleArchetype) -> frozenset[TaskType]:
    from .domain import ROLE_PERMISSIONS

    return ROLE_PERMISSIONS[role]


# ---------------------------------------------------------------------------
# protocol document


def render_protocol_document(svc: "LabService", lab_id: str, agent_id: str) -> dict:
    """Deterministic per-agent, per-lab contract; same inputs, same bytes."""
    lab = svc.store.lab(lab_id)
    record = svc.store.agent(agent_id)
    role = lab.role_of(agent_id)
    if role is None:
        raise NotMember(f"{agent_id} is not a member of {lab_id}")
    permitted_types = [t.value for t in permitted_task_types(role)]
    banned_types = [t.value for t in hard_bans(role)]
    done_table = {
        t.value: DEFINITION_OF_DONE_TEXT[t].format(
            min_sources=svc.config.min_accepted_sources
        )
        for t in permitted_task_types(role)
    }
    structured = {
        "agent_id": agent_id,
        "lab_id": lab_id,
        "role": role.value,
        "role_card": {
            "permitted_task_types": permitted_types,
            "hard_bans": banned_types,
            "escalation_triggers": list(ESCALATION_TRIGGERS[role]),
            "definition_of_done": done_table,
        },
        "heartbeat_cadence_seconds": HEARTBEAT_CADENCE_SECONDS,
        "poll_interval_seconds": {"min": POLL_MIN_SECONDS, "max": POLL_MAX_SECONDS},
        "provider_norms": PROVIDER_NORMS,
        "governance": lab.governance.to_dict(),
    }
    structured["rendered"] = _render_markdown(lab, record, structured)
    return structured


def _render_markdown(lab: "Lab", record: AgentRecord, doc: dict) -> str:
    lines = [
        f"# Protocol: {lab.name}",
        "",
        f"Agent: {record.display_name} ({doc['agent_id']})",
        f"Role: {doc['role']}",
        f"Governance: {_governance_line(doc['governance'])}",
        "",
        "## Permitted task types",
    ]
    lines += [f"- {t}" for t in doc["role_card"]["permitted_task_types"]]
    lines += ["", "## Hard bans"]
    banned = doc["role_card"]["hard_bans"]
    lines += [f"- {t}" for t in banned] if banned else ["- none"]
    lines += ["", "## Escalation triggers"]
    lines += [f"- {t}" for t in doc["role_card"]["escalation_triggers"]]
    lines += ["", "## Definition of done"]
    lines += [
        f"- {task_type}: {text}"
        for task_type, text in sorted(doc["role_card"]["definition_of_done"].items())
    ]
    lines += [
        "",
        "## Operational norms",
        f"- Heartbeat at least every {doc['heartbeat_cadence_seconds']} seconds.",
        (
            f"- Poll for work every {doc['poll_interval_seconds']['min']}-"
            f"{doc['poll_interval_seconds']['max']} seconds; the server never pushes."
        ),
        f"- {doc['provider_norms']}",
        "",
    ]
    return "\n".join(lines)


def _governance_line(governance: dict) -> str:
    if governance["model"] == "democratic":
        return f"democratic (quorum fraction {governance['quorum_fraction']})"
    return governance["model"]
