from __future__ import annotations

from dataclasses import dataclass

import pytest

from agentlab import LabService, ServiceConfig, VirtualClock
from agentlab.auth import Principal
from agentlab.domain import PI_LED, GovernanceModel, RoleArchetype, TaskType


@dataclass
class Member:
    record: object
    token: str
    principal: Principal

    @property
    def agent_id(self) -> str:
        return self.record.agent_id


@dataclass
class World:
    svc: LabService
    clock: VirtualClock
    pi: Member
    analyst: Member
    scout: Member
    critic: Member
    synthesizer: Member
    outsider: Member
    lab: object
    state: object
    human: Principal

    def member(self, role: RoleArchetype) -> Member:
        return {
            RoleArchetype.PRINCIPAL_INVESTIGATOR: self.pi,
            RoleArchetype.RESEARCH_ANALYST: self.analyst,
            RoleArchetype.SCOUT: self.scout,
            RoleArchetype.CRITIC: self.critic,
            RoleArchetype.SYNTHESIZER: self.synthesizer,
        }[role]

    def heartbeat_all(self) -> None:
        for member in (self.pi, self.analyst, self.scout, self.critic, self.synthesizer):
            self.svc.heartbeat(member.principal)


OBSERVER_TOKEN = "feedbeef" * 8


def make_service(**overrides) -> tuple[LabService, VirtualClock]:
    clock = VirtualClock(1_000_000)
    settings = dict(
        rng_seed=1234,
        job_execution="manual",
        observer_tokens={OBSERVER_TOKEN: "watcher"},
    )
    settings.update(overrides)
    svc = LabService(ServiceConfig(**settings), clock=clock)
    return svc, clock


def make_world(
    governance: GovernanceModel = PI_LED, heartbeats: bool = True, **overrides
) -> World:
    svc, clock = make_service(**overrides)

    def register(name: str) -> Member:
        record, token = svc.register_agent(name, f"soul of {name}")
        return Member(record, token, svc.authenticate(token))

    pi = register("pi")
    analyst = register("analyst")
    scout = register("scout")
    critic = register("critic")
    synthesizer = register("synthesizer")
    outsider = register("outsider")
    lab = svc.create_lab(pi.principal, "testbed lab", pi.agent_id, governance)
    svc.add_member(pi.principal, lab.lab_id, analyst.agent_id, RoleArchetype.RESEARCH_ANALYST)
    svc.add_member(pi.principal, lab.lab_id, scout.agent_id, RoleArchetype.SCOUT)
    svc.add_member(pi.principal, lab.lab_id, critic.agent_id, RoleArchetype.CRITIC)
    svc.add_member(pi.principal, lab.lab_id, synthesizer.agent_id, RoleArchetype.SYNTHESIZER)
    state = svc.create_state(pi.principal, lab.lab_id, "hypothesis v1", "it works", ["check"])
    svc.activate_state(pi.principal, state.state_id)
    world = World(
        svc=svc,
        clock=clock,
        pi=pi,
        analyst=analyst,
        scout=scout,
        critic=critic,
        synthesizer=synthesizer,
        outsider=outsider,
        lab=lab,
        state=state,
        human=svc.authenticate(OBSERVER_TOKEN),
    )
    if heartbeats:
        world.heartbeat_all()
        svc.heartbeat(outsider.principal)
    return world


@pytest.fixture
def world() -> World:
    return make_world()


def run_literature_task(world: World, title: str = "review task"):
    """Propose -> claim -> stub job -> complete; returns the completed task."""
    svc = world.svc
    task = svc.propose_task(
        world.pi.principal, world.lab.lab_id, TaskType.LITERATURE_REVIEW, title
    )
    svc.claim_task(world.scout.principal, task.task_id)
    job = svc.submit_literature_job(
        world.scout.principal,
        world.lab.lab_id,
        {
            "research_question": "protein domain misannotation",
            "source_databases": ["arxiv", "pubmed"],
            "result_limit": 5,
        },
    )
    svc.execute_job(job.job_id)
    svc.complete_task(
        world.scout.principal,
        task.task_id,
        {
            "summary": "done",
            "provider_job_ids": [job.job_id],
            "structured_payload": {"bibliography": [{"title": "entry", "year": 2024}]},
        },
    )
    return svc.store.task(task.task_id)
