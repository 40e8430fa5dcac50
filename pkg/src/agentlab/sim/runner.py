"""Discrete-event scenario runner.

Agents wake on their own 45-90 s jittered schedules against a virtual
clock; the schedule is derived from the seed, so a (scenario, seed) pair
reproduces its report bit for bit.  Concurrency is modelled as a
deterministic interleaving: one agent turn at a time, ordered by
(wake time, scheduling sequence).
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

from ..auth import Principal
from ..clock import VirtualClock
from ..config import ServiceConfig
from ..core import LabService
from ..dispatch import POLL_MAX_SECONDS, POLL_MIN_SECONDS
from ..domain import RoleArchetype, TaskStatus, TaskType
from ..errors import ProtocolError
from ..tasklife import latest_verification
from ..util import stable_seed
from . import policies
from .scenario import AgentScript, Scenario

MS = 1000


class StepBudgetExceeded(Exception):
    pass


@dataclass
class SybilSpec:
    count: int
    mode: str = policies.BEHAVIOR_VOTE_FLOOD  # vote_flood | productive_scout


@dataclass
class AgentRuntime:
    script: AgentScript
    agent_id: str
    principal: Principal
    rng: random.Random
    behavior: str = policies.BEHAVIOR_DEFAULT
    memory: dict = field(default_factory=dict)
    wake_times: list[int] = field(default_factory=list)


@dataclass
class SimReport:
    scenario_name: str
    seed: int
    sybil_count: int
    sybil_mode: str | None
    final_domain_hash: str
    final_global_hash: str
    assertions: list[dict]
    event_counts: dict[str, int]
    events_total: int
    action_count: int
    virtual_duration_seconds: int
    accepted_task_titles: list[str]
    completed_literature_count: int
    unverified_accepted_task_ids: list[str]
    human_action_count: int
    agent_ids: dict[str, str]
    trace: list[dict] = field(default_factory=list)
    wake_times: dict[str, list[int]] = field(default_factory=dict)

    @property
    def all_assertions_passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def to_dict(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "seed": self.seed,
            "sybil_count": self.sybil_count,
            "sybil_mode": self.sybil_mode,
            "final_domain_hash": self.final_domain_hash,
            "final_global_hash": self.final_global_hash,
            "assertions": self.assertions,
            "event_counts": dict(sorted(self.event_counts.items())),
            "events_total": self.events_total,
            "action_count": self.action_count,
            "virtual_duration_seconds": self.virtual_duration_seconds,
            "accepted_task_titles": self.accepted_task_titles,
            "completed_literature_count": self.completed_literature_count,
            "unverified_accepted_task_ids": self.unverified_accepted_task_ids,
            "human_action_count": self.human_action_count,
            "agent_ids": self.agent_ids,
        }


class SimContext:
    def __init__(self, scenario: Scenario, seed: int, sybils: SybilSpec | None):
        self.scenario = scenario
        self.seed = seed
        self.sybils = sybils
        self.clock = VirtualClock(0)
        self.service = LabService(
            ServiceConfig(
                rng_seed=stable_seed(seed, "service"),
                job_execution="manual",
                vote_window_seconds=scenario.vote_window_seconds,
                min_accepted_sources=scenario.min_accepted_sources,
            ),
            clock=self.clock,
        )
        self.lab_id: str | None = None
        self.runtimes: list[AgentRuntime] = []
        self.trace: list[dict] = []
        self.action_count = 0
        self._queue: list[tuple[int, int, str, object]] = []
        self._seq = 0

    # -- scheduling ------------------------------------------------------------

    def now_ms(self) -> int:
        return self.clock.now_ms()

    def now_seconds(self) -> int:
        return self.clock.now_ms() // MS

    def schedule(self, at_ms: int, kind: str, data: object) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (at_ms, self._seq, kind, data))

    def schedule_job(self, job_id: str) -> None:
        self.schedule(self.now_ms() + self.scenario.job_latency_seconds * MS, "job", job_id)

    def schedule_vote_expiry(self, task_id: str, vote) -> None:
        self.schedule(vote.expires_at_ms() + 1, "expire", task_id)

    # -- instrumented service calls -----------------------------------------------

    def call(self, rt: AgentRuntime, action: str, fn, *args, **kwargs):
        self.action_count += 1
        if self.action_count > self.scenario.step_budget:
            raise StepBudgetExceeded(
                f"exceeded step budget of {self.scenario.step_budget} actions"
            )
        try:
            outcome = fn(*args, **kwargs)
            self.trace.append(
                {"t": self.now_ms(), "agent": rt.script.name, "action": action, "ok": True}
            )
            return outcome
        except ProtocolError as exc:
            self.trace.append(
                {
                    "t": self.now_ms(),
                    "agent": rt.script.name,
                    "action": action,
                    "ok": False,
                    "error": exc.code,
                }
            )
            return None


def _sybil_scripts(scenario: Scenario, sybils: SybilSpec) -> list[AgentScript]:
    role = (
        RoleArchetype.SCOUT
        if sybils.mode == "productive_scout"
        else RoleArchetype.CRITIC
    )
    return [
        AgentScript(
            name=f"sybil-{index:03d}",
            role=role,
            soul="sybil swarm member",
            join_at_seconds=0,
        )
        for index in range(1, sybils.count + 1)
    ]


def _frozen(scenario: Scenario, rt: AgentRuntime, now_ms: int) -> bool:
    for directive in scenario.directives:
        if directive.agent_name != rt.script.name:
            continue
        start = directive.from_seconds * MS
        end = None if directive.until_seconds is None else directive.until_seconds * MS
        if now_ms >= start and (end is None or now_ms < end):
            return True
    return False


def run_scenario(
    scenario: Scenario, seed: int, sybils: SybilSpec | None = None
) -> SimReport:
    """Drive the scenario's policy agents against a fresh in-memory service."""
    report, _ = run_scenario_with_context(scenario, seed, sybils)
    return report


def run_scenario_with_context(
    scenario: Scenario, seed: int, sybils: SybilSpec | None = None
) -> tuple[SimReport, SimContext]:
    """run_scenario, but also hands back the driven service for inspection."""
    for stage in scenario.stages:
        stage.triggered = False  # scenarios are reusable across runs
    ctx = SimContext(scenario, seed, sybils)
    scripts = list(scenario.agents)
    if sybils is not None and sybils.count > 0:
        scripts.extend(_sybil_scripts(scenario, sybils))

    for script in scripts:
        record, token = ctx.service.register_agent(script.name, script.soul)
        rt = AgentRuntime(
            script=script,
            agent_id=record.agent_id,
            principal=ctx.service.authenticate(token),
            rng=random.Random(stable_seed(seed, "agent", script.name)),
            behavior=(
                policies.BEHAVIOR_VOTE_FLOOD
                if sybils is not None
                and script.name.startswith("sybil-")
                and sybils.mode == policies.BEHAVIOR_VOTE_FLOOD
                else policies.BEHAVIOR_DEFAULT
            ),
        )
        ctx.runtimes.append(rt)
        ctx.schedule(rt.rng.randint(0, POLL_MAX_SECONDS) * MS, "wake", rt)

    horizon_ms = scenario.horizon_seconds * MS
    while ctx._queue:
        at_ms, _, kind, data = heapq.heappop(ctx._queue)
        if at_ms > horizon_ms:
            break
        ctx.clock.advance_to(at_ms)
        if kind == "wake":
            rt = data
            rt.wake_times.append(at_ms)
            if not _frozen(scenario, rt, at_ms):
                ctx.call(rt, "heartbeat", ctx.service.heartbeat, rt.principal)
            bundle = ctx.call(rt, "poll", ctx.service.poll_work, rt.principal)
            policies.act(ctx, rt, bundle)
            next_wake = at_ms + rt.rng.randint(POLL_MIN_SECONDS, POLL_MAX_SECONDS) * MS
            ctx.schedule(next_wake, "wake", rt)
        elif kind == "job":
            job = ctx.service.store.jobs[data]
            if job.status == "queued":
                ctx.action_count += 1
                ctx.service.execute_job(data)
        elif kind == "expire":
            task = ctx.service.store.tasks[data]
            vote = task.vote
            if (
                task.status is TaskStatus.VOTING
                and vote is not None
                and vote.open
                and ctx.now_ms() >= vote.expires_at_ms()
            ):
                ctx.action_count += 1
                ctx.service.expire_vote(data)
    ctx.clock.advance_to(max(ctx.clock.now_ms(), horizon_ms))
    return _build_report(ctx), ctx


def _build_report(ctx: SimContext) -> SimReport:
    store = ctx.service.store
    event_counts: dict[str, int] = {}
    human_actions = 0
    for event in store.events:
        event_counts[event.kind] = event_counts.get(event.kind, 0) + 1
        if event.actor.startswith("human:"):
            human_actions += 1
    accepted = [t for t in store.tasks.values() if t.status is TaskStatus.ACCEPTED]
    unverified_accepted = [
        t.task_id
        for t in accepted
        if (record := latest_verification(ctx.service, t.task_id)) is None
        or not record.passed_overall
    ]
    completed_literature = sum(
        1
        for t in store.tasks.values()
        if t.task_type is TaskType.LITERATURE_REVIEW
        and any(h["status"] == TaskStatus.COMPLETED.value for h in t.status_history)
    )
    report = SimReport(
        scenario_name=ctx.scenario.name,
        seed=ctx.seed,
        sybil_count=ctx.sybils.count if ctx.sybils else 0,
        sybil_mode=ctx.sybils.mode if ctx.sybils else None,
        final_domain_hash=store.domain_state_hash(),
        final_global_hash=store.global_state_hash(),
        assertions=[],
        event_counts=event_counts,
        events_total=len(store.events),
        action_count=ctx.action_count,
        virtual_duration_seconds=ctx.now_seconds(),
        accepted_task_titles=sorted(t.title for t in accepted),
        completed_literature_count=completed_literature,
        unverified_accepted_task_ids=sorted(unverified_accepted),
        human_action_count=human_actions,
        agent_ids={rt.script.name: rt.agent_id for rt in ctx.runtimes},
        trace=ctx.trace,
        wake_times={rt.script.name: list(rt.wake_times) for rt in ctx.runtimes},
    )
    report.assertions = [_evaluate_assertion(ctx, report, a) for a in ctx.scenario.assertions]
    return report


def _evaluate_assertion(ctx: SimContext, report: SimReport, assertion: dict) -> dict:
    store = ctx.service.store
    check = assertion["check"]
    passed = False
    detail = ""
    if check == "task_count":
        task_type = assertion.get("task_type")
        count = sum(
            1
            for t in store.tasks.values()
            if task_type is None or t.task_type.value == task_type
        )
        passed = count == int(assertion["equals"])
        detail = f"{count} tasks of type {task_type}"
    elif check == "accepted_task_count_at_least":
        count = len(report.accepted_task_titles)
        passed = count >= int(assertion["value"])
        detail = f"{count} accepted tasks"
    elif check == "completed_task_count_at_least":
        count = sum(
            1
            for t in store.tasks.values()
            if any(h["status"] == TaskStatus.COMPLETED.value for h in t.status_history)
        )
        passed = count >= int(assertion["value"])
        detail = f"{count} tasks reached completed"
    elif check == "accepted_synthesis_sources_at_least":
        minimum = int(assertion["value"])
        synth = [
            t
            for t in store.tasks.values()
            if t.task_type is TaskType.SYNTHESIS and t.status is TaskStatus.ACCEPTED
        ]
        counts = [
            sum(
                1
                for sid in t.result.source_task_ids
                if store.tasks[sid].status is TaskStatus.ACCEPTED
            )
            for t in synth
            if t.result is not None
        ]
        passed = bool(counts) and all(c >= minimum for c in counts)
        detail = f"accepted synthesis tasks cite {counts} accepted sources"
    elif check == "document_count":
        count = len(store.documents)
        passed = count == int(assertion["equals"])
        detail = f"{count} documents"
    elif check == "synthesizer_join_to_completion_seconds_at_most":
        limit_ms = int(assertion["value"]) * MS
        synth_ids = {
            rt.agent_id
            for rt in ctx.runtimes
            if rt.script.role is RoleArchetype.SYNTHESIZER
        }
        joined_at = {
            e.payload["agent_id"]: e.timestamp
            for e in store.events
            if e.kind == "member_added" and e.payload["agent_id"] in synth_ids
        }
        spans = [
            e.timestamp - joined_at[e.actor]
            for e in store.events
            if e.kind == "task_completed" and e.actor in joined_at
        ]
        passed = bool(spans) and min(spans) <= limit_ms
        detail = f"join-to-completion spans (ms): {spans}"
    elif check == "human_action_count":
        passed = report.human_action_count == int(assertion["equals"])
        detail = f"{report.human_action_count} human-authored events"
    elif check == "unverified_accepted_empty":
        passed = not report.unverified_accepted_task_ids
        detail = f"unverified accepted: {report.unverified_accepted_task_ids}"
    return {"check": check, "passed": passed, "detail": detail}
