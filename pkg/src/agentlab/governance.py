"""Labs, membership, versioned lab states, and the vote-evaluation engine.

Quorum math uses exact rational arithmetic throughout; no floats are
involved in deciding whether a vote resolves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Mapping

from .auth import Principal, require_agent
from .domain import (
    CONCLUSION_STATUSES,
    GovernanceKind,
    GovernanceModel,
    LabStateStatus,
    RoleArchetype,
    VoteValue,
    state_transition_allowed,
)
from .errors import (
    AlreadyMember,
    IllegalStateTransition,
    InvalidRequest,
    NotPI,
    UnknownAgent,
)

if TYPE_CHECKING:
    from .core import LabService


class GovernanceOutcome(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


VOTE_OUTCOME_PENDING = "pending"
VOTE_OUTCOME_ACCEPTED = "accepted"
VOTE_OUTCOME_REJECTED = "rejected"
VOTE_OUTCOME_VOIDED = "voided"


# ---------------------------------------------------------------------------
# entities


@dataclass
class Lab:
    lab_id: str
    name: str
    governance: GovernanceModel
    pi_agent_id: str
    member_roles: dict[str, RoleArchetype]
    source_forum_post_id: str | None
    created_at: int

    @property
    def member_ids(self) -> set[str]:
        return set(self.member_roles)

    def role_of(self, agent_id: str) -> RoleArchetype | None:
        return self.member_roles.get(agent_id)

    def to_dict(self) -> dict:
        return {
            "lab_id": self.lab_id,
            "name": self.name,
            "governance": self.governance.to_dict(),
            "pi_agent_id": self.pi_agent_id,
            "member_roles": {a: r.value for a, r in sorted(self.member_roles.items())},
            "source_forum_post_id": self.source_forum_post_id,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Lab":
        return cls(
            lab_id=data["lab_id"],
            name=data["name"],
            governance=GovernanceModel.from_dict(data["governance"]),
            pi_agent_id=data["pi_agent_id"],
            member_roles={a: RoleArchetype(r) for a, r in data["member_roles"].items()},
            source_forum_post_id=data.get("source_forum_post_id"),
            created_at=data["created_at"],
        )


@dataclass
class LabState:
    state_id: str
    lab_id: str
    title: str
    hypothesis: str
    objectives: list[str]
    status: LabStateStatus
    version: int
    created_at: int
    concluded_at: int | None = None

    def to_dict(self) -> dict:
        return {
            "state_id": self.state_id,
            "lab_id": self.lab_id,
            "title": self.title,
            "hypothesis": self.hypothesis,
            "objectives": list(self.objectives),
            "status": self.status.value,
            "version": self.version,
            "created_at": self.created_at,
            "concluded_at": self.concluded_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LabState":
        return cls(
            state_id=data["state_id"],
            lab_id=data["lab_id"],
            title=data["title"],
            hypothesis=data["hypothesis"],
            objectives=list(data["objectives"]),
            status=LabStateStatus(data["status"]),
            version=data["version"],
            created_at=data["created_at"],
            concluded_at=data.get("concluded_at"),
        )


@dataclass
class VoteRecord:
    task_id: str
    initiated_by: str
    opened_at: int
    window_seconds: int
    ballots: dict[str, VoteValue] = field(default_factory=dict)
    # every cast, including overwrites, for the audit trail: (agent, value, at_ms)
    ballot_log: list[tuple[str, str, int]] = field(default_factory=list)
    outcome: str = VOTE_OUTCOME_PENDING
    resolved_at: int | None = None

    @property
    def open(self) -> bool:
        return self.outcome == VOTE_OUTCOME_PENDING

    def expires_at_ms(self) -> int:
        return self.opened_at + self.window_seconds * 1000

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "initiated_by": self.initiated_by,
            "opened_at": self.opened_at,
            "window_seconds": self.window_seconds,
            "ballots": {a: v.value for a, v in sorted(self.ballots.items())},
            "ballot_log": [list(entry) for entry in self.ballot_log],
            "outcome": self.outcome,
            "resolved_at": self.resolved_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VoteRecord":
        return cls(
            task_id=data["task_id"],
            initiated_by=data["initiated_by"],
            opened_at=data["opened_at"],
            window_seconds=data["window_seconds"],
            ballots={a: VoteValue(v) for a, v in data["ballots"].items()},
            ballot_log=[tuple(entry) for entry in data["ballot_log"]],
            outcome=data["outcome"],
            resolved_at=data.get("resolved_at"),
        )


# ---------------------------------------------------------------------------
# vote evaluation


def ceil_fraction(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def quorum_threshold(governance: GovernanceModel, active_member_count: int) -> int:
    """Substantive ballots required before a vote may resolve.

    A minimum of two substantive votes from at least the governed fraction
    of the lab's active membership; "at least half" rounds up.
    """
    if governance.kind is GovernanceKind.CONSENSUS:
        return max(2, active_member_count)
    fraction = (
        Fraction(1, 2)
        if governance.kind is GovernanceKind.PI_LED
        else governance.quorum_fraction
    )
    return max(2, ceil_fraction(fraction * active_member_count))


def tally(ballots: Mapping[str, VoteValue]) -> tuple[int, int, int]:
    """(approvals, rejections, substantive). Abstentions never count."""
    approvals = sum(1 for v in ballots.values() if v is VoteValue.APPROVE)
    rejections = sum(1 for v in ballots.values() if v is VoteValue.REJECT)
    return approvals, rejections, approvals + rejections


def evaluate_vote(
    ballots: Mapping[str, VoteValue],
    active_member_count: int,
    governance: GovernanceModel,
) -> GovernanceOutcome:
    """Decide a ballot map under the given governance model.

    pi_led / democratic: once quorum is met, a strict majority decides;
    ties stay pending (they resolve rejected only at window expiry).
    consensus: any rejection rejects; acceptance requires approval from
    every active member (and never fewer than two approvals).
    """
    if active_member_count < 0:
        raise ValueError("active_member_count must be non-negative")
    approvals, rejections, substantive = tally(ballots)
    if governance.kind is GovernanceKind.CONSENSUS:
        if rejections > 0:
            return GovernanceOutcome.REJECTED
        if approvals >= max(2, active_member_count):
            return GovernanceOutcome.ACCEPTED
        return GovernanceOutcome.PENDING
    if substantive < quorum_threshold(governance, active_member_count):
        return GovernanceOutcome.PENDING
    if approvals > rejections:
        return GovernanceOutcome.ACCEPTED
    if rejections > approvals:
        return GovernanceOutcome.REJECTED
    return GovernanceOutcome.PENDING


# ---------------------------------------------------------------------------
# operations


def require_pi(lab: Lab, agent_id: str) -> None:
    if lab.pi_agent_id != agent_id:
        raise NotPI(f"{agent_id} is not the principal investigator of {lab.lab_id}")


def create_lab(
    svc: "LabService",
    actor: Principal,
    name: str,
    pi_agent_id: str,
    governance: GovernanceModel,
    source_forum_post_id: str | None = None,
) -> Lab:
    # Any authenticated actor may seed a lab; the PI must be a registered agent.
    if pi_agent_id not in svc.store.agents:
        raise UnknownAgent(f"unknown PI agent {pi_agent_id}")
    if not name.strip():
        raise InvalidRequest("lab name must be non-empty")
    now = svc.now()
    lab = Lab(
        lab_id=svc.ids.next("lab"),
        name=name,
        governance=governance,
        pi_agent_id=pi_agent_id,
        member_roles={pi_agent_id: RoleArchetype.PRINCIPAL_INVESTIGATOR},
        source_forum_post_id=source_forum_post_id,
        created_at=now,
    )
    svc.store.labs[lab.lab_id] = lab
    if source_forum_post_id is not None:
        svc.store.post(source_forum_post_id).claimed_by_lab = lab.lab_id
    svc.emit(
        "lab_created",
        actor.subject_id,
        lab.lab_id,
        {
            "lab_id": lab.lab_id,
            "name": name,
            "governance": governance.to_dict(),
            "pi_agent_id": pi_agent_id,
            "source_forum_post_id": source_forum_post_id,
        },
    )
    return lab


def add_member(
    svc: "LabService",
    actor: Principal,
    lab_id: str,
    agent_id: str,
    role: RoleArchetype,
) -> Lab:
    agent_actor = require_agent(actor)
    lab = svc.store.lab(lab_id)
    require_pi(lab, agent_actor)
    if agent_id not in svc.store.agents:
        raise UnknownAgent(f"unknown agent {agent_id}")
    if agent_id in lab.member_roles:
        raise AlreadyMember(f"{agent_id} is already a member of {lab_id}")
    if role is RoleArchetype.PRINCIPAL_INVESTIGATOR:
        raise InvalidRequest("a lab has exactly one principal investigator")
    lab.member_roles[agent_id] = role
    svc.emit(
        "member_added",
        agent_actor,
        lab_id,
        {"agent_id": agent_id, "role": role.value},
    )
    return lab


def create_state(
    svc: "LabService",
    actor: Principal,
    lab_id: str,
    title: str,
    hypothesis: str,
    objectives: list[str],
) -> LabState:
    agent_actor = require_agent(actor)
    lab = svc.store.lab(lab_id)
    require_pi(lab, agent_actor)
    version = 1 + sum(1 for s in svc.store.lab_states.values() if s.lab_id == lab_id)
    state = LabState(
        state_id=svc.ids.next("state"),
        lab_id=lab_id,
        title=title,
        hypothesis=hypothesis,
        objectives=list(objectives),
        status=LabStateStatus.DRAFT,
        version=version,
        created_at=svc.now(),
    )
    svc.store.lab_states[state.state_id] = state
    svc.emit(
        "state_created",
        agent_actor,
        lab_id,
        {
            "state_id": state.state_id,
            "title": title,
            "hypothesis": hypothesis,
            "objectives": list(objectives),
            "version": version,
        },
    )
    return state


def active_state(svc: "LabService", lab_id: str) -> LabState | None:
    for state in svc.store.lab_states.values():
        if state.lab_id == lab_id and state.status is LabStateStatus.ACTIVE:
            return state
    return None


def _conclude(
    svc: "LabService",
    state: LabState,
    conclusion: LabStateStatus,
    actor_id: str,
    auto: bool,
) -> None:
    if not state_transition_allowed(state.status, conclusion):
        raise IllegalStateTransition(
            f"cannot conclude state {state.state_id} from {state.status.value}"
        )
    state.status = conclusion
    state.concluded_at = svc.now()
    svc.emit(
        "state_concluded",
        actor_id,
        state.lab_id,
        {
            "state_id": state.state_id,
            "conclusion": conclusion.value,
            "auto": auto,
        },
    )


def activate_state(svc: "LabService", actor: Principal, state_id: str) -> LabState:
    agent_actor = require_agent(actor)
    state = svc.store.lab_state(state_id)
    lab = svc.store.lab(state.lab_id)
    require_pi(lab, agent_actor)
    if not state_transition_allowed(state.status, LabStateStatus.ACTIVE):
        raise IllegalStateTransition(
            f"cannot activate state {state_id} from {state.status.value}"
        )
    # Activating a new state automatically concludes the previous one as pivoted.
    previous = active_state(svc, state.lab_id)
    if previous is not None:
        _conclude(svc, previous, LabStateStatus.PIVOTED, agent_actor, auto=True)
    state.status = LabStateStatus.ACTIVE
    svc.emit(
        "state_activated",
        agent_actor,
        state.lab_id,
        {
            "state_id": state_id,
            "pivoted_state_id": previous.state_id if previous else None,
        },
    )
    return state


def conclude_state(
    svc: "LabService",
    actor: Principal,
    state_id: str,
    conclusion: LabStateStatus,
) -> LabState:
    agent_actor = require_agent(actor)
    state = svc.store.lab_state(state_id)
    lab = svc.store.lab(state.lab_id)
    require_pi(lab, agent_actor)
    if conclusion not in CONCLUSION_STATUSES:
        raise InvalidRequest(f"{conclusion.value} is not a conclusion status")
    _conclude(svc, state, conclusion, agent_actor, auto=False)
    return state
