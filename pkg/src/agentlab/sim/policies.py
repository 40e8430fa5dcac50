"""Deterministic policy agents.

Each policy is a pure function of (work bundle, local memory, seeded RNG)
plus read access to the service; scripted payloads come from the scenario
file, never from generated text.  Identical seeds give identical action
traces.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from ..domain import RoleArchetype, TaskStatus, TaskType, VoteValue
from ..tasklife import TaskResult

if TYPE_CHECKING:
    from .runner import AgentRuntime, SimContext

BEHAVIOR_DEFAULT = "default"
BEHAVIOR_VOTE_FLOOD = "vote_flood"


def act(ctx: "SimContext", rt: "AgentRuntime", bundle) -> None:
    if rt.behavior == BEHAVIOR_VOTE_FLOOD:
        _act_flood(ctx, rt, bundle)
        return
    role = rt.script.role
    if role is RoleArchetype.PRINCIPAL_INVESTIGATOR:
        _act_pi(ctx, rt, bundle)
    elif role is RoleArchetype.SCOUT:
        _act_worker(ctx, rt, bundle, TaskType.LITERATURE_REVIEW)
    elif role is RoleArchetype.RESEARCH_ANALYST:
        _act_worker(ctx, rt, bundle, TaskType.ANALYSIS)
    elif role is RoleArchetype.SYNTHESIZER:
        _act_synthesizer(ctx, rt, bundle)
    else:  # critics have no claimable work in the shipped scenarios
        pass
    _approve_open_votes(ctx, rt, bundle)


def _approve_open_votes(ctx: "SimContext", rt: "AgentRuntime", bundle) -> None:
    if bundle is None:
        return
    for vote_task in bundle.open_votes:
        ctx.call(
            rt,
            f"ballot:{vote_task['task_id']}",
            ctx.service.cast_vote,
            rt.principal,
            vote_task["task_id"],
            VoteValue.APPROVE,
        )


# ---------------------------------------------------------------------------
# principal investigator


def _act_pi(ctx: "SimContext", rt: "AgentRuntime", bundle) -> None:
    if ctx.lab_id is None:
        _pi_bootstrap(ctx, rt)
        return
    _pi_admit_joiners(ctx, rt)
    _pi_trigger_stages(ctx, rt)
    _pi_review_completed(ctx, rt)


def _pi_bootstrap(ctx: "SimContext", rt: "AgentRuntime") -> None:
    from ..domain import GovernanceModel

    scenario = ctx.scenario
    lab = ctx.call(
        rt,
        "create_lab",
        ctx.service.create_lab,
        rt.principal,
        scenario.lab_name,
        rt.agent_id,
        GovernanceModel.from_dict(scenario.governance),
    )
    if lab is None:
        return
    ctx.lab_id = lab.lab_id
    state = ctx.call(
        rt,
        "create_state",
        ctx.service.create_state,
        rt.principal,
        lab.lab_id,
        scenario.state.get("title", scenario.lab_name),
        scenario.state.get("hypothesis", ""),
        [str(o) for o in scenario.state.get("objectives", [])],
    )
    if state is not None:
        ctx.call(
            rt, "activate_state", ctx.service.activate_state, rt.principal, state.state_id
        )
    _pi_admit_joiners(ctx, rt)
    _pi_trigger_stages(ctx, rt)


def _pi_admit_joiners(ctx: "SimContext", rt: "AgentRuntime") -> None:
    lab = ctx.service.store.lab(ctx.lab_id)
    for other in ctx.runtimes:
        if other.agent_id == rt.agent_id or other.agent_id in lab.member_roles:
            continue
        if _join_condition_met(ctx, other):
            ctx.call(
                rt,
                f"admit:{other.script.name}",
                ctx.service.add_member,
                rt.principal,
                ctx.lab_id,
                other.agent_id,
                other.script.role,
            )


def _join_condition_met(ctx: "SimContext", rt: "AgentRuntime") -> bool:
    script = rt.script
    if script.join_when is not None:
        needed = script.join_when.get("accepted_tasks_at_least")
        if needed is not None:
            return _accepted_count(ctx) >= int(needed)
        return False
    return ctx.now_seconds() >= (script.join_at_seconds or 0)


def _accepted_count(ctx: "SimContext") -> int:
    return sum(
        1
        for t in ctx.service.store.tasks.values()
        if t.lab_id == ctx.lab_id and t.status is TaskStatus.ACCEPTED
    )


def _ever_completed(task) -> bool:
    return any(entry["status"] == TaskStatus.COMPLETED.value for entry in task.status_history)


def _pi_trigger_stages(ctx: "SimContext", rt: "AgentRuntime") -> None:
    store = ctx.service.store
    completed_literature = sum(
        1
        for t in store.tasks.values()
        if t.lab_id == ctx.lab_id
        and t.task_type is TaskType.LITERATURE_REVIEW
        and _ever_completed(t)
    )
    for stage in ctx.scenario.stages:
        if stage.triggered:
            continue
        trigger = stage.trigger
        met = (
            trigger.get("at_start", False)
            or (
                "completed_literature_at_least" in trigger
                and completed_literature >= int(trigger["completed_literature_at_least"])
            )
            or (
                "accepted_tasks_at_least" in trigger
                and _accepted_count(ctx) >= int(trigger["accepted_tasks_at_least"])
            )
            or (
                "at_seconds" in trigger
                and ctx.now_seconds() >= int(trigger["at_seconds"])
            )
        )
        if not met:
            continue
        stage.triggered = True
        for script in stage.tasks:
            ctx.call(
                rt,
                f"propose:{script.title[:40]}",
                ctx.service.propose_task,
                rt.principal,
                ctx.lab_id,
                script.task_type,
                script.title,
                script.description,
            )


def _pi_review_completed(ctx: "SimContext", rt: "AgentRuntime") -> None:
    """Verify fresh completions; initiate votes on verified, uncontested work."""
    verified_epochs: dict = rt.memory.setdefault("verified_epochs", {})
    for task in ctx.service.tasks_of_lab(ctx.lab_id):
        if task.status is not TaskStatus.COMPLETED:
            continue
        epoch = next(
            (
                entry["at"]
                for entry in reversed(task.status_history)
                if entry["status"] == TaskStatus.COMPLETED.value
            ),
            None,
        )
        record = None
        if verified_epochs.get(task.task_id) != epoch:
            record = ctx.call(
                rt, f"verify:{task.task_id}", ctx.service.verify_task, rt.principal, task.task_id
            )
            verified_epochs[task.task_id] = epoch
            if record is None or not record.passed_overall:
                continue
        else:
            records = ctx.service.store.verifications.get(task.task_id, [])
            if not records or not records[-1].passed_overall:
                continue
        vote = ctx.call(
            rt,
            f"initiate_vote:{task.task_id}",
            ctx.service.initiate_vote,
            rt.principal,
            task.task_id,
        )
        if vote is not None:
            ctx.schedule_vote_expiry(task.task_id, vote)
            ctx.call(
                rt,
                f"ballot:{task.task_id}",
                ctx.service.cast_vote,
                rt.principal,
                task.task_id,
                VoteValue.APPROVE,
            )


# ---------------------------------------------------------------------------
# workers (scout / analyst)


def _my_in_progress(ctx: "SimContext", rt: "AgentRuntime"):
    return [
        t
        for t in ctx.service.tasks_of_lab(ctx.lab_id)
        if t.assignee == rt.agent_id and t.status is TaskStatus.IN_PROGRESS
    ]


def _act_worker(ctx: "SimContext", rt: "AgentRuntime", bundle, kind: TaskType) -> None:
    if ctx.lab_id is None:
        return
    assigned = _my_in_progress(ctx, rt)
    if assigned:
        _work_on(ctx, rt, assigned[0])
        return
    if bundle is None:
        return
    for candidate in bundle.claimable_tasks:
        if candidate["task_type"] != kind.value:
            continue
        task = ctx.call(
            rt,
            f"claim:{candidate['task_id']}",
            ctx.service.claim_task,
            rt.principal,
            candidate["task_id"],
        )
        if task is not None:
            _work_on(ctx, rt, task)
            return


def _work_on(ctx: "SimContext", rt: "AgentRuntime", task) -> None:
    script = ctx.scenario.script_for(task.title)
    jobs: dict = rt.memory.setdefault("jobs", {})
    if script is None or not script.evidence:
        _complete(ctx, rt, task, TaskResult(summary="completed without evidence"))
        return
    request = script.query or script.analysis
    if request is None:
        _complete(ctx, rt, task, TaskResult(summary=script.summary or "completed"))
        return
    job_id = jobs.get(task.task_id)
    if job_id is None:
        if script.query is not None:
            job = ctx.call(
                rt,
                f"literature_job:{task.task_id}",
                ctx.service.submit_literature_job,
                rt.principal,
                ctx.lab_id,
                script.query,
            )
        else:
            job = ctx.call(
                rt,
                f"analysis_job:{task.task_id}",
                ctx.service.submit_analysis_job,
                rt.principal,
                ctx.lab_id,
                script.analysis,
            )
        if job is not None:
            jobs[task.task_id] = job.job_id
            ctx.schedule_job(job.job_id)
        return
    job = ctx.service.store.jobs[job_id]
    if job.status in ("queued", "running"):
        return  # poll again next wake
    payload: dict = {}
    if script.bibliography:
        payload["bibliography"] = list(script.bibliography)
    result = TaskResult(
        summary=script.summary or f"results for {task.title}",
        provider_job_ids=[job_id],
        structured_payload=payload,
    )
    _complete(ctx, rt, task, result)


def _complete(ctx: "SimContext", rt: "AgentRuntime", task, result: TaskResult) -> None:
    ctx.call(
        rt,
        f"complete:{task.task_id}",
        ctx.service.complete_task,
        rt.principal,
        task.task_id,
        result,
    )


# ---------------------------------------------------------------------------
# synthesizer


def _act_synthesizer(ctx: "SimContext", rt: "AgentRuntime", bundle) -> None:
    if ctx.lab_id is None:
        return
    assigned = _my_in_progress(ctx, rt)
    if assigned:
        task = assigned[0]
        script = ctx.scenario.script_for(task.title)
        document = (script.document if script else None) or {
            "title": f"Evidence summary: {task.title}",
            "body": "# Evidence summary\n(no scripted content)\n",
        }
        record = ctx.call(
            rt,
            f"upload:{task.task_id}",
            ctx.service.upload_document,
            rt.principal,
            ctx.lab_id,
            document["title"],
            document["body"].encode("utf-8"),
            document.get("media_type", "text/markdown"),
        )
        if record is None:
            return
        sources = sorted(
            t.task_id
            for t in ctx.service.tasks_of_lab(ctx.lab_id)
            if t.status is TaskStatus.ACCEPTED
        )
        result = TaskResult(
            summary=(script.summary if script else "") or f"synthesis of {len(sources)} accepted items",
            document_ids=[record.document_id],
            source_task_ids=sources,
        )
        _complete(ctx, rt, task, result)
        return
    if bundle is None:
        return
    for candidate in bundle.claimable_tasks:
        if candidate["task_type"] == TaskType.SYNTHESIS.value:
            ctx.call(
                rt,
                f"claim:{candidate['task_id']}",
                ctx.service.claim_task,
                rt.principal,
                candidate["task_id"],
            )
            return


# ---------------------------------------------------------------------------
# sybil flood


def _act_flood(ctx: "SimContext", rt: "AgentRuntime", bundle) -> None:
    """Unanimous-approval sybil: ballots on everything and keeps trying to
    push the unverified target; the protocol has to shrug all of it off."""
    _approve_open_votes(ctx, rt, bundle)
    if ctx.lab_id is None:
        return
    for title in ctx.scenario.sabotage_titles():
        target = next(
            (
                t
                for t in ctx.service.tasks_of_lab(ctx.lab_id)
                if t.title == title and t.status is not TaskStatus.ACCEPTED
            ),
            None,
        )
        if target is None:
            continue
        ctx.call(
            rt,
            f"flood_ballot:{target.task_id}",
            ctx.service.cast_vote,
            rt.principal,
            target.task_id,
            VoteValue.APPROVE,
        )
        ctx.call(
            rt,
            f"flood_initiate:{target.task_id}",
            ctx.service.initiate_vote,
            rt.principal,
            target.task_id,
        )
