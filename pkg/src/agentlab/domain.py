"""Pure domain rules: role and task enumerations, the role-permission
matrix, and the legal-transition tables for tasks and lab states.

Everything in this module is a total function over immutable values; no
identity, persistence, or timing concerns belong here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class RoleArchetype(str, Enum):
    PRINCIPAL_INVESTIGATOR = "principal_investigator"
    RESEARCH_ANALYST = "research_analyst"
    SCOUT = "scout"
    CRITIC = "critic"
    SYNTHESIZER = "synthesizer"


class TaskType(str, Enum):
    LITERATURE_REVIEW = "literature_review"
    ANALYSIS = "analysis"
    DEEP_RESEARCH = "deep_research"
    CRITIQUE = "critique"
    SYNTHESIS = "synthesis"


class TaskStatus(str, Enum):
    PROPOSED = "proposed"
    IN_PROGRESS = "in_progress"
    COMPLETED = "completed"
    CRITIQUE_PERIOD = "critique_period"
    VOTING = "voting"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    SUPERSEDED = "superseded"


class LabStateStatus(str, Enum):
    DRAFT = "draft"
    ACTIVE = "active"
    PROVEN = "proven"
    DISPROVEN = "disproven"
    PIVOTED = "pivoted"
    INCONCLUSIVE = "inconclusive"


class GovernanceKind(str, Enum):
    PI_LED = "pi_led"
    DEMOCRATIC = "democratic"
    CONSENSUS = "consensus"


class VoteValue(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"
    ABSTAIN = "abstain"


def is_substantive(value: VoteValue) -> bool:
    return value in (VoteValue.APPROVE, VoteValue.REJECT)


@dataclass(frozen=True)
class GovernanceModel:
    """Governance configuration; quorum_fraction is present iff democratic."""

    kind: GovernanceKind
    quorum_fraction: Fraction | None = None

    def __post_init__(self):
        if self.kind is GovernanceKind.DEMOCRATIC:
            q = self.quorum_fraction
            if q is None or not (0 < q <= 1):
                raise ValueError("democratic governance needs quorum_fraction in (0, 1]")
        elif self.quorum_fraction is not None:
            raise ValueError(f"{self.kind.value} governance takes no quorum_fraction")

    def to_dict(self) -> dict:
        out: dict = {"model": self.kind.value}
        if self.quorum_fraction is not None:
            out["quorum_fraction"] = str(self.quorum_fraction)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GovernanceModel":
        kind = GovernanceKind(data["model"])
        fraction = data.get("quorum_fraction")
        return cls(kind, Fraction(fraction) if fraction is not None else None)


PI_LED = GovernanceModel(GovernanceKind.PI_LED)
CONSENSUS = GovernanceModel(GovernanceKind.CONSENSUS)


def democratic(quorum_fraction: Fraction | str) -> GovernanceModel:
    return GovernanceModel(GovernanceKind.DEMOCRATIC, Fraction(quorum_fraction))


# Role-permission matrix: hard restrictions, 9 true cells out of 25.
# The PI is the only role that may execute all five task types.
ROLE_PERMISSIONS: dict[RoleArchetype, frozenset[TaskType]] = {
    RoleArchetype.PRINCIPAL_INVESTIGATOR: frozenset(TaskType),
    RoleArchetype.RESEARCH_ANALYST: frozenset({TaskType.ANALYSIS, TaskType.DEEP_RESEARCH}),
    RoleArchetype.SCOUT: frozenset({TaskType.LITERATURE_REVIEW}),
    RoleArchetype.CRITIC: frozenset({TaskType.CRITIQUE}),
    RoleArchetype.SYNTHESIZER: frozenset({TaskType.SYNTHESIS}),
}


def can_execute(role: RoleArchetype, task_type: TaskType) -> bool:
    return task_type in ROLE_PERMISSIONS[role]


def permitted_task_types(role: RoleArchetype) -> list[TaskType]:
    return sorted(ROLE_PERMISSIONS[role], key=lambda t: t.value)


def hard_bans(role: RoleArchetype) -> list[TaskType]:
    return sorted(set(TaskType) - ROLE_PERMISSIONS[role], key=lambda t: t.value)


TERMINAL_TASK_STATUSES = frozenset(
    {TaskStatus.ACCEPTED, TaskStatus.REJECTED, TaskStatus.SUPERSEDED}
)

# Uncontested path: proposed -> in_progress -> completed -> voting -> accepted/rejected.
# Contested path inserts critique_period between completed and voting; a dismissed
# critique restores vote eligibility (-> completed), an upheld one rejects.
# voting -> completed models a vote window expiring without quorum.
# Any non-terminal task may be superseded.
_TASK_EDGES: frozenset[tuple[TaskStatus, TaskStatus]] = frozenset(
    [
        (TaskStatus.PROPOSED, TaskStatus.IN_PROGRESS),
        (TaskStatus.IN_PROGRESS, TaskStatus.COMPLETED),
        (TaskStatus.COMPLETED, TaskStatus.CRITIQUE_PERIOD),
        (TaskStatus.COMPLETED, TaskStatus.VOTING),
        (TaskStatus.CRITIQUE_PERIOD, TaskStatus.COMPLETED),
        (TaskStatus.CRITIQUE_PERIOD, TaskStatus.REJECTED),
        (TaskStatus.VOTING, TaskStatus.ACCEPTED),
        (TaskStatus.VOTING, TaskStatus.REJECTED),
        (TaskStatus.VOTING, TaskStatus.COMPLETED),
    ]
    + [
        (status, TaskStatus.SUPERSEDED)
        for status in TaskStatus
        if status not in TERMINAL_TASK_STATUSES
    ]
)


def task_transition_allowed(from_status: TaskStatus, to_status: TaskStatus) -> bool:
    return (from_status, to_status) in _TASK_EDGES


CONCLUSION_STATUSES = frozenset(
    {
        LabStateStatus.PROVEN,
        LabStateStatus.DISPROVEN,
        LabStateStatus.PIVOTED,
        LabStateStatus.INCONCLUSIVE,
    }
)

_STATE_EDGES: frozenset[tuple[LabStateStatus, LabStateStatus]] = frozenset(
    [(LabStateStatus.DRAFT, LabStateStatus.ACTIVE)]
    + [(LabStateStatus.ACTIVE, conclusion) for conclusion in CONCLUSION_STATUSES]
)


def state_transition_allowed(
    from_status: LabStateStatus, to_status: LabStateStatus
) -> bool:
    return (from_status, to_status) in _STATE_EDGES
