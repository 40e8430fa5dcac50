"""Task entities and the enforced lifecycle.

Uncontested path: proposed -> in_progress -> completed -> voting ->
accepted/rejected.  The contested path inserts a critique period that must
close before voting.  Acceptance is gated on a PI-produced verification
record, so a task lacking tool-grounded evidence can never reach voting
regardless of how many ballots anyone casts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .auth import Principal, require_agent
from .domain import (
    RoleArchetype,
    TaskStatus,
    TaskType,
    VoteValue,
    can_execute,
    task_transition_allowed,
)
from .errors import (
    AlreadyClaimed,
    CritiqueClosed,
    DanglingReference,
    EmptyIssues,
    IllegalTransition,
    InvalidRequest,
    NoActiveState,
    NotAssignee,
    NotMember,
    NotPI,
    RoleForbidden,
    StaleAgent,
    UnresolvedCritique,
    VerificationMissingOrFailed,
    VoteClosed,
)
from .events import SYSTEM_ACTOR
from .governance import (
    GovernanceOutcome,
    VOTE_OUTCOME_ACCEPTED,
    VOTE_OUTCOME_REJECTED,
    VOTE_OUTCOME_VOIDED,
    VoteRecord,
    active_state,
    evaluate_vote,
    quorum_threshold,
    require_pi,
    tally,
)

if TYPE_CHECKING:
    from .core import LabService
    from .governance import Lab

CRITIQUE_OPEN = "open"
CRITIQUE_UPHELD = "upheld"
CRITIQUE_DISMISSED = "dismissed"
CRITIQUE_WITHDRAWN = "withdrawn"

# Verification check names are stable; tests and protocol documents refer to them.
CHECK_PROVIDER_JOBS = "provider_jobs_succeeded"
CHECK_BIBLIOGRAPHY = "bibliography_present"
CHECK_CHECKSUMS = "dataset_checksums_verified"
CHECK_MIN_SOURCES = "min_accepted_sources"
CHECK_DOCUMENT = "document_uploaded"
CHECK_CRITIQUE_FILED = "critique_filed"


@dataclass
class TaskResult:
    summary: str
    provider_job_ids: list[str] = field(default_factory=list)
    document_ids: list[str] = field(default_factory=list)
    source_task_ids: list[str] = field(default_factory=list)
    structured_payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "summary": self.summary,
            "provider_job_ids": list(self.provider_job_ids),
            "document_ids": list(self.document_ids),
            "source_task_ids": list(self.source_task_ids),
            "structured_payload": self.structured_payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskResult":
        return cls(
            summary=data.get("summary", ""),
            provider_job_ids=list(data.get("provider_job_ids", [])),
            document_ids=list(data.get("document_ids", [])),
            source_task_ids=list(data.get("source_task_ids", [])),
            structured_payload=dict(data.get("structured_payload", {})),
        )


@dataclass
class Task:
    task_id: str
    lab_id: str
    lab_state_id: str
    task_type: TaskType
    title: str
    description: str
    status: TaskStatus
    proposed_by: str
    created_at: int
    assignee: str | None = None
    result: TaskResult | None = None
    critique_ids: list[str] = field(default_factory=list)
    vote_history: list[VoteRecord] = field(default_factory=list)
    superseded_by: str | None = None
    origin_suggestion_id: str | None = None
    origin_critique_id: str | None = None
    status_history: list[dict] = field(default_factory=list)

    @property
    def vote(self) -> VoteRecord | None:
        return self.vote_history[-1] if self.vote_history else None

    def summary_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "lab_id": self.lab_id,
            "task_type": self.task_type.value,
            "title": self.title,
            "status": self.status.value,
            "assignee": self.assignee,
        }

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "lab_id": self.lab_id,
            "lab_state_id": self.lab_state_id,
            "task_type": self.task_type.value,
            "title": self.title,
            "description": self.description,
            "status": self.status.value,
            "proposed_by": self.proposed_by,
            "created_at": self.created_at,
            "assignee": self.assignee,
            "result": self.result.to_dict() if self.result else None,
            "critique_ids": list(self.critique_ids),
            "votes": [v.to_dict() for v in self.vote_history],
            "superseded_by": self.superseded_by,
            "origin_suggestion_id": self.origin_suggestion_id,
            "origin_critique_id": self.origin_critique_id,
            "status_history": [dict(h) for h in self.status_history],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Task":
        return cls(
            task_id=data["task_id"],
            lab_id=data["lab_id"],
            lab_state_id=data["lab_state_id"],
            task_type=TaskType(data["task_type"]),
            title=data["title"],
            description=data["description"],
            status=TaskStatus(data["status"]),
            proposed_by=data["proposed_by"],
            created_at=data["created_at"],
            assignee=data.get("assignee"),
            result=TaskResult.from_dict(data["result"]) if data.get("result") else None,
            critique_ids=list(data.get("critique_ids", [])),
            vote_history=[VoteRecord.from_dict(v) for v in data.get("votes", [])],
            superseded_by=data.get("superseded_by"),
            origin_suggestion_id=data.get("origin_suggestion_id"),
            origin_critique_id=data.get("origin_critique_id"),
            status_history=[dict(h) for h in data.get("status_history", [])],
        )


@dataclass
class Critique:
    critique_id: str
    task_id: str
    filed_by: str
    issues: list[str]
    alternative_proposal: dict | None
    status: str
    created_at: int
    resolution_note: str | None = None
    resolved_at: int | None = None

    def to_dict(self) -> dict:
        return {
            "critique_id": self.critique_id,
            "task_id": self.task_id,
            "filed_by": self.filed_by,
            "issues": list(self.issues),
            "alternative_proposal": self.alternative_proposal,
            "status": self.status,
            "created_at": self.created_at,
            "resolution_note": self.resolution_note,
            "resolved_at": self.resolved_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Critique":
        return cls(
            critique_id=data["critique_id"],
            task_id=data["task_id"],
            filed_by=data["filed_by"],
            issues=list(data["issues"]),
            alternative_proposal=data.get("alternative_proposal"),
            status=data["status"],
            created_at=data["created_at"],
            resolution_note=data.get("resolution_note"),
            resolved_at=data.get("resolved_at"),
        )


@dataclass
class VerificationRecord:
    task_id: str
    verified_by: str
    checks: list[dict]
    passed_overall: bool
    verified_at: int

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "verified_by": self.verified_by,
            "checks": [dict(c) for c in self.checks],
            "passed_overall": self.passed_overall,
            "verified_at": self.verified_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationRecord":
        return cls(
            task_id=data["task_id"],
            verified_by=data["verified_by"],
            checks=[dict(c) for c in data["checks"]],
            passed_overall=data["passed_overall"],
            verified_at=data["verified_at"],
        )


# ---------------------------------------------------------------------------
# lifecycle helpers


def _set_status(svc: "LabService", task: Task, to_status: TaskStatus) -> TaskStatus:
    """The single chokepoint for task status changes; enforces the table."""
    from_status = task.status
    if not task_transition_allowed(from_status, to_status):
        raise IllegalTransition(
            f"task {task.task_id}: {from_status.value} -> {to_status.value}"
        )
    task.status = to_status
    task.status_history.append({"status": to_status.value, "at": svc.now()})
    return from_status


def open_critiques(svc: "LabService", task_id: str) -> list[Critique]:
    task = svc.store.task(task_id)
    return [
        svc.store.critique(cid)
        for cid in task.critique_ids
        if svc.store.critique(cid).status == CRITIQUE_OPEN
    ]


def latest_verification(svc: "LabService", task_id: str) -> VerificationRecord | None:
    records = svc.store.verifications.get(task_id)
    return records[-1] if records else None


def _require_member(lab: "Lab", agent_id: str) -> RoleArchetype:
    role = lab.role_of(agent_id)
    if role is None:
        raise NotMember(f"{agent_id} is not a member of {lab.lab_id}")
    return role


# ---------------------------------------------------------------------------
# operations


def propose_task(
    svc: "LabService",
    actor: Principal,
    lab_id: str,
    task_type: TaskType,
    title: str,
    description: str,
    origin_suggestion_id: str | None = None,
    origin_critique_id: str | None = None,
    proposer_override: str | None = None,
) -> Task:
    agent_actor = require_agent(actor)
    lab = svc.store.lab(lab_id)
    proposer = proposer_override or agent_actor
    _require_member(lab, proposer)
    state = active_state(svc, lab_id)
    if state is None:
        raise NoActiveState(f"lab {lab_id} has no active state")
    if not title.strip():
        raise InvalidRequest("task title must be non-empty")
    now = svc.now()
    task = Task(
        task_id=svc.ids.next("task"),
        lab_id=lab_id,
        lab_state_id=state.state_id,
        task_type=task_type,
        title=title,
        description=description,
        status=TaskStatus.PROPOSED,
        proposed_by=proposer,
        created_at=now,
        origin_suggestion_id=origin_suggestion_id,
        origin_critique_id=origin_critique_id,
        status_history=[{"status": TaskStatus.PROPOSED.value, "at": now}],
    )
    svc.store.tasks[task.task_id] = task
    svc.emit(
        "task_proposed",
        proposer,
        lab_id,
        {
            "task_id": task.task_id,
            "lab_state_id": state.state_id,
            "task_type": task_type.value,
            "title": title,
            "description": description,
            "origin_suggestion_id": origin_suggestion_id,
            "origin_critique_id": origin_critique_id,
        },
    )
    return task


def claim_task(svc: "LabService", actor: Principal, task_id: str) -> Task:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    lab = svc.store.lab(task.lab_id)
    role = _require_member(lab, agent_actor)
    if task.status is not TaskStatus.PROPOSED:
        raise AlreadyClaimed(f"task {task_id} is {task.status.value}")
    if not can_execute(role, task.task_type):
        raise RoleForbidden(
            f"role {role.value} cannot execute {task.task_type.value} tasks"
        )
    if not svc.agent_is_active(agent_actor):
        raise StaleAgent(f"{agent_actor} has no fresh heartbeat")
    _set_status(svc, task, TaskStatus.IN_PROGRESS)
    task.assignee = agent_actor
    svc.emit(
        "task_claimed",
        agent_actor,
        task.lab_id,
        {
            "task_id": task_id,
            "assignee": agent_actor,
            "status_before": TaskStatus.PROPOSED.value,
            "status_after": TaskStatus.IN_PROGRESS.value,
        },
    )
    return task


def _check_result_references(svc: "LabService", task: Task, result: TaskResult) -> None:
    for job_id in result.provider_job_ids:
        job = svc.store.jobs.get(job_id)
        if job is None or job.lab_id != task.lab_id:
            raise DanglingReference(f"unknown provider job {job_id}")
    for document_id in result.document_ids:
        record = svc.store.documents.get(document_id)
        if record is None:
            raise DanglingReference(f"unknown document {document_id}")
    for source_id in result.source_task_ids:
        source = svc.store.tasks.get(source_id)
        if source is None or source.lab_id != task.lab_id:
            raise DanglingReference(f"unknown source task {source_id}")


def complete_task(
    svc: "LabService", actor: Principal, task_id: str, result: TaskResult
) -> Task:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    if task.status is not TaskStatus.IN_PROGRESS:
        raise IllegalTransition(
            f"task {task_id} is {task.status.value}, not in_progress"
        )
    if task.assignee != agent_actor:
        raise NotAssignee(f"{agent_actor} is not the assignee of {task_id}")
    _check_result_references(svc, task, result)
    _set_status(svc, task, TaskStatus.COMPLETED)
    task.result = result
    svc.emit(
        "task_completed",
        agent_actor,
        task.lab_id,
        {
            "task_id": task_id,
            "result": result.to_dict(),
            "status_before": TaskStatus.IN_PROGRESS.value,
            "status_after": TaskStatus.COMPLETED.value,
        },
    )
    return task


def file_critique(
    svc: "LabService",
    actor: Principal,
    task_id: str,
    issues: list[str],
    alternative_proposal: dict | None = None,
) -> Critique:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    lab = svc.store.lab(task.lab_id)
    _require_member(lab, agent_actor)
    if not issues or not all(str(i).strip() for i in issues):
        raise EmptyIssues("a critique needs at least one concrete issue")
    # Additional critiques may be filed while a critique period is already open.
    if task.status not in (TaskStatus.COMPLETED, TaskStatus.CRITIQUE_PERIOD):
        raise IllegalTransition(
            f"cannot critique task {task_id} in status {task.status.value}"
        )
    if alternative_proposal is not None:
        alternative_proposal = _validated_alternative(alternative_proposal)
    status_before = task.status
    if task.status is TaskStatus.COMPLETED:
        _set_status(svc, task, TaskStatus.CRITIQUE_PERIOD)
    critique = Critique(
        critique_id=svc.ids.next("crit"),
        task_id=task_id,
        filed_by=agent_actor,
        issues=[str(i) for i in issues],
        alternative_proposal=alternative_proposal,
        status=CRITIQUE_OPEN,
        created_at=svc.now(),
    )
    svc.store.critiques[critique.critique_id] = critique
    task.critique_ids.append(critique.critique_id)
    svc.emit(
        "task_critiqued",
        agent_actor,
        task.lab_id,
        {
            "task_id": task_id,
            "critique_id": critique.critique_id,
            "issues": critique.issues,
            "alternative_proposal": alternative_proposal,
            "status_before": status_before.value,
            "status_after": task.status.value,
        },
    )
    return critique


def _validated_alternative(proposal: dict) -> dict:
    try:
        task_type = TaskType(proposal["task_type"])
        title = str(proposal["title"])
        description = str(proposal.get("description", ""))
    except (KeyError, ValueError) as exc:
        raise InvalidRequest(f"malformed alternative proposal: {exc}") from exc
    if not title.strip():
        raise InvalidRequest("alternative proposal title must be non-empty")
    return {"task_type": task_type.value, "title": title, "description": description}


def resolve_critique(
    svc: "LabService",
    actor: Principal,
    critique_id: str,
    disposition: str,
    resolution_note: str | None = None,
) -> Critique:
    agent_actor = require_agent(actor)
    critique = svc.store.critique(critique_id)
    task = svc.store.task(critique.task_id)
    lab = svc.store.lab(task.lab_id)
    if disposition not in (CRITIQUE_UPHELD, CRITIQUE_DISMISSED):
        raise InvalidRequest("disposition must be upheld or dismissed")
    is_pi = lab.pi_agent_id == agent_actor
    is_filer = critique.filed_by == agent_actor
    if not is_pi:
        # The filer may withdraw (a dismissal they initiate); everything else is PI-only.
        if not (is_filer and disposition == CRITIQUE_DISMISSED):
            raise NotPI("only the PI resolves critiques (filers may withdraw)")
    if critique.status != CRITIQUE_OPEN:
        raise CritiqueClosed(f"critique {critique_id} is {critique.status}")

    if disposition == CRITIQUE_UPHELD:
        final_status = CRITIQUE_UPHELD
    else:
        final_status = CRITIQUE_DISMISSED if is_pi else CRITIQUE_WITHDRAWN
    critique.status = final_status
    critique.resolution_note = resolution_note
    critique.resolved_at = svc.now()

    task_status_before = task.status
    if final_status == CRITIQUE_UPHELD:
        if task.status is TaskStatus.CRITIQUE_PERIOD:
            _set_status(svc, task, TaskStatus.REJECTED)
    else:
        still_open = [
            cid
            for cid in task.critique_ids
            if svc.store.critique(cid).status == CRITIQUE_OPEN
        ]
        if not still_open and task.status is TaskStatus.CRITIQUE_PERIOD:
            _set_status(svc, task, TaskStatus.COMPLETED)
    svc.emit(
        "critique_resolved",
        agent_actor,
        task.lab_id,
        {
            "critique_id": critique_id,
            "task_id": task.task_id,
            "disposition": final_status,
            "resolution_note": resolution_note,
            "task_status_before": task_status_before.value,
            "task_status_after": task.status.value,
        },
    )
    if final_status == CRITIQUE_UPHELD and critique.alternative_proposal:
        # Rework happens through the alternative, credited to the filer.
        if active_state(svc, task.lab_id) is not None:
            proposal = critique.alternative_proposal
            propose_task(
                svc,
                actor,
                task.lab_id,
                TaskType(proposal["task_type"]),
                proposal["title"],
                proposal.get("description", ""),
                origin_critique_id=critique_id,
                proposer_override=critique.filed_by,
            )
    return critique


# ---------------------------------------------------------------------------
# verification (the definition-of-done gate)


def _referenced_jobs(svc: "LabService", result: TaskResult) -> list:
    return [svc.store.jobs[jid] for jid in result.provider_job_ids]


def definition_of_done_checks(svc: "LabService", task: Task) -> list[dict]:
    """Evaluate the per-type evidence requirements against a completed task."""
    result = task.result or TaskResult(summary="")
    jobs = _referenced_jobs(svc, result)
    checks: list[dict] = []
    task_type = task.task_type

    if task_type in (TaskType.LITERATURE_REVIEW, TaskType.ANALYSIS, TaskType.DEEP_RESEARCH):
        required_kinds = {
            TaskType.LITERATURE_REVIEW: {"literature"},
            TaskType.ANALYSIS: {"analysis"},
            TaskType.DEEP_RESEARCH: {"literature", "analysis"},
        }[task_type]
        succeeded = [j for j in jobs if j.status == "succeeded"]
        kinds_covered = {j.kind for j in succeeded}
        all_clean = all(j.status == "succeeded" for j in jobs)
        passed = bool(jobs) and all_clean and required_kinds <= kinds_covered
        checks.append(
            {
                "name": CHECK_PROVIDER_JOBS,
                "passed": passed,
                "detail": (
                    f"{len(succeeded)}/{len(jobs)} referenced jobs succeeded; "
                    f"required kinds: {', '.join(sorted(required_kinds))}"
                ),
            }
        )

    if task_type in (TaskType.LITERATURE_REVIEW, TaskType.DEEP_RESEARCH):
        bibliography = result.structured_payload.get("bibliography")
        has_bibliography = isinstance(bibliography, list) and len(bibliography) > 0
        checks.append(
            {
                "name": CHECK_BIBLIOGRAPHY,
                "passed": has_bibliography,
                "detail": f"{len(bibliography) if has_bibliography else 0} bibliography entries",
            }
        )

    if task_type in (TaskType.ANALYSIS, TaskType.DEEP_RESEARCH):
        analysis_jobs = [j for j in jobs if j.kind == "analysis"]
        verified = all(
            j.status == "succeeded" and j.checksum_failures == 0 for j in analysis_jobs
        )
        checks.append(
            {
                "name": CHECK_CHECKSUMS,
                "passed": bool(analysis_jobs) and verified,
                "detail": f"{len(analysis_jobs)} analysis jobs, checksums recomputed server-side",
            }
        )

    if task_type is TaskType.SYNTHESIS:
        minimum = svc.config.min_accepted_sources
        accepted_sources = [
            sid
            for sid in result.source_task_ids
            if svc.store.tasks.get(sid) is not None
            and svc.store.tasks[sid].status is TaskStatus.ACCEPTED
        ]
        checks.append(
            {
                "name": CHECK_MIN_SOURCES,
                "passed": len(accepted_sources) >= minimum,
                "detail": f"{len(accepted_sources)} accepted sources (minimum {minimum})",
            }
        )
        checks.append(
            {
                "name": CHECK_DOCUMENT,
                "passed": len(result.document_ids) > 0,
                "detail": f"{len(result.document_ids)} documents uploaded",
            }
        )

    if task_type is TaskType.CRITIQUE:
        critique_id = result.structured_payload.get("critique_id")
        critique = svc.store.critiques.get(critique_id) if critique_id else None
        passed = critique is not None and critique.filed_by == task.assignee
        checks.append(
            {
                "name": CHECK_CRITIQUE_FILED,
                "passed": passed,
                "detail": f"critique reference: {critique_id or 'missing'}",
            }
        )
    return checks


def verify_task(svc: "LabService", actor: Principal, task_id: str) -> VerificationRecord:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    lab = svc.store.lab(task.lab_id)
    require_pi(lab, agent_actor)
    if task.status is not TaskStatus.COMPLETED:
        raise IllegalTransition(
            f"task {task_id} is {task.status.value}; only completed tasks are verified"
        )
    checks = definition_of_done_checks(svc, task)
    record = VerificationRecord(
        task_id=task_id,
        verified_by=agent_actor,
        checks=checks,
        passed_overall=all(c["passed"] for c in checks),
        verified_at=svc.now(),
    )
    svc.store.verifications.setdefault(task_id, []).append(record)
    svc.emit(
        "task_verified",
        agent_actor,
        task.lab_id,
        {
            "task_id": task_id,
            "checks": [dict(c) for c in checks],
            "passed_overall": record.passed_overall,
        },
    )
    return record


# ---------------------------------------------------------------------------
# voting


def initiate_vote(
    svc: "LabService",
    actor: Principal,
    task_id: str,
    window_seconds: int | None = None,
) -> VoteRecord:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    lab = svc.store.lab(task.lab_id)
    require_pi(lab, agent_actor)
    if task.status is not TaskStatus.COMPLETED:
        raise IllegalTransition(
            f"task {task_id} is {task.status.value}; voting starts from completed"
        )
    if open_critiques(svc, task_id):
        raise UnresolvedCritique(f"task {task_id} has open critiques")
    verification = latest_verification(svc, task_id)
    if verification is None or not verification.passed_overall:
        raise VerificationMissingOrFailed(
            f"task {task_id} lacks a passing verification record"
        )
    window = window_seconds if window_seconds is not None else svc.config.vote_window_seconds
    if window <= 0:
        raise InvalidRequest("vote window must be positive")
    vote = VoteRecord(
        task_id=task_id,
        initiated_by=agent_actor,
        opened_at=svc.now(),
        window_seconds=window,
    )
    _set_status(svc, task, TaskStatus.VOTING)
    task.vote_history.append(vote)
    svc.emit(
        "vote_initiated",
        agent_actor,
        task.lab_id,
        {
            "task_id": task_id,
            "window_seconds": window,
            "status_before": TaskStatus.COMPLETED.value,
            "status_after": TaskStatus.VOTING.value,
        },
    )
    return vote


def _resolve_vote(
    svc: "LabService", task: Task, outcome: GovernanceOutcome, actor_id: str
) -> None:
    vote = task.vote
    assert vote is not None and vote.open
    approvals, rejections, substantive = tally(vote.ballots)
    active = svc.active_member_count(task.lab_id)
    vote.outcome = (
        VOTE_OUTCOME_ACCEPTED
        if outcome is GovernanceOutcome.ACCEPTED
        else VOTE_OUTCOME_REJECTED
    )
    vote.resolved_at = svc.now()
    status_before = task.status
    _set_status(
        svc,
        task,
        TaskStatus.ACCEPTED
        if outcome is GovernanceOutcome.ACCEPTED
        else TaskStatus.REJECTED,
    )
    svc.emit(
        "vote_resolved",
        actor_id,
        task.lab_id,
        {
            "task_id": task.task_id,
            "outcome": vote.outcome,
            "approvals": approvals,
            "rejections": rejections,
            "substantive": substantive,
            "active_members": active,
            "status_before": status_before.value,
            "status_after": task.status.value,
        },
    )


def cast_vote(
    svc: "LabService", actor: Principal, task_id: str, value: VoteValue
) -> VoteRecord:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    lab = svc.store.lab(task.lab_id)
    _require_member(lab, agent_actor)
    # A vote whose window has elapsed resolves before the ballot is considered.
    if (
        task.status is TaskStatus.VOTING
        and task.vote is not None
        and task.vote.open
        and svc.now() >= task.vote.expires_at_ms()
    ):
        expire_vote(svc, task_id)
    if task.status is not TaskStatus.VOTING or task.vote is None or not task.vote.open:
        raise VoteClosed(f"no open vote on task {task_id}")
    vote = task.vote
    vote.ballots[agent_actor] = value
    vote.ballot_log.append((agent_actor, value.value, svc.now()))
    svc.emit(
        "ballot_cast",
        agent_actor,
        task.lab_id,
        {"task_id": task_id, "value": value.value},
    )
    outcome = evaluate_vote(
        vote.ballots, svc.active_member_count(task.lab_id), lab.governance
    )
    if outcome is not GovernanceOutcome.PENDING:
        _resolve_vote(svc, task, outcome, agent_actor)
    return vote


def expire_vote(svc: "LabService", task_id: str) -> Task:
    """Resolve a vote whose window has elapsed.

    Quorum met: strict majority decides, a tie rejects.  Quorum not met:
    the vote is voided and the verified work returns to completed rather
    than being discarded.
    """
    task = svc.store.task(task_id)
    vote = task.vote
    if task.status is not TaskStatus.VOTING or vote is None or not vote.open:
        raise IllegalTransition(f"task {task_id} has no open vote")
    now = svc.now()
    if now < vote.expires_at_ms():
        raise IllegalTransition(f"vote on task {task_id} has not expired yet")
    lab = svc.store.lab(task.lab_id)
    active = svc.active_member_count(task.lab_id)
    outcome = evaluate_vote(vote.ballots, active, lab.governance)
    if outcome is not GovernanceOutcome.PENDING:
        _resolve_vote(svc, task, outcome, SYSTEM_ACTOR)
        return task
    approvals, rejections, substantive = tally(vote.ballots)
    consensus = lab.governance.kind.value == "consensus"
    if not consensus and substantive >= quorum_threshold(lab.governance, active):
        # Quorum met but tied: no strict majority, the conservative default rejects.
        _resolve_vote(svc, task, GovernanceOutcome.REJECTED, SYSTEM_ACTOR)
        return task
    vote.outcome = VOTE_OUTCOME_VOIDED
    vote.resolved_at = now
    status_before = task.status
    _set_status(svc, task, TaskStatus.COMPLETED)
    svc.emit(
        "vote_voided",
        SYSTEM_ACTOR,
        task.lab_id,
        {
            "task_id": task_id,
            "reason": "window_expired_without_quorum",
            "approvals": approvals,
            "rejections": rejections,
            "substantive": substantive,
            "active_members": active,
            "status_before": status_before.value,
            "status_after": task.status.value,
        },
    )
    return task


def supersede_task(
    svc: "LabService", actor: Principal, task_id: str, successor_task_id: str
) -> Task:
    agent_actor = require_agent(actor)
    task = svc.store.task(task_id)
    lab = svc.store.lab(task.lab_id)
    require_pi(lab, agent_actor)
    if successor_task_id == task_id or successor_task_id not in svc.store.tasks:
        raise DanglingReference(f"invalid successor task {successor_task_id}")
    status_before = task.status
    if not task_transition_allowed(status_before, TaskStatus.SUPERSEDED):
        raise IllegalTransition(f"task {task_id} is terminal ({status_before.value})")
    vote = task.vote
    if vote is not None and vote.open:
        vote.outcome = VOTE_OUTCOME_VOIDED
        vote.resolved_at = svc.now()
        svc.emit(
            "vote_voided",
            agent_actor,
            task.lab_id,
            {
                "task_id": task_id,
                "reason": "superseded",
                "status_before": None,
                "status_after": None,
            },
        )
    _set_status(svc, task, TaskStatus.SUPERSEDED)
    task.superseded_by = successor_task_id
    svc.emit(
        "task_superseded",
        agent_actor,
        task.lab_id,
        {
            "task_id": task_id,
            "successor_task_id": successor_task_id,
            "status_before": status_before.value,
            "status_after": TaskStatus.SUPERSEDED.value,
        },
    )
    return task
