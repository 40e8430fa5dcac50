from __future__ import annotations

import time

import pytest

from agentlab import LabService, ServiceConfig
from agentlab.domain import CONSENSUS, TaskStatus, VoteValue, democratic
from agentlab.providers import JOB_SUCCEEDED

from conftest import make_world, run_literature_task


def test_pool_mode_executes_jobs_in_background():
    svc = LabService(ServiceConfig(rng_seed=3, job_execution="pool"))
    record, token = svc.register_agent("pool scout")
    actor = svc.authenticate(token)
    svc.heartbeat(actor)
    lab = svc.create_lab(actor, "pool lab", record.agent_id, __import__("agentlab").PI_LED)
    job = svc.submit_literature_job(
        actor,
        lab.lab_id,
        {
            "research_question": "protein domain misannotation",
            "source_databases": ["arxiv"],
            "result_limit": 3,
        },
    )
    deadline = time.time() + 5
    while job.status not in ("succeeded", "failed") and time.time() < deadline:
        time.sleep(0.01)
    assert job.status == JOB_SUCCEEDED
    svc.close()


def vote_ready_task(world):
    task = run_literature_task(world)
    world.svc.verify_task(world.pi.principal, task.task_id)
    world.svc.initiate_vote(world.pi.principal, task.task_id)
    return task


def test_consensus_requires_every_active_member():
    world = make_world(governance=CONSENSUS)
    svc = world.svc
    task = vote_ready_task(world)
    members = (world.pi, world.scout, world.analyst, world.critic, world.synthesizer)
    for member in members[:-1]:
        svc.cast_vote(member.principal, task.task_id, VoteValue.APPROVE)
        assert svc.store.task(task.task_id).status is TaskStatus.VOTING
    svc.cast_vote(members[-1].principal, task.task_id, VoteValue.APPROVE)
    assert svc.store.task(task.task_id).status is TaskStatus.ACCEPTED


def test_consensus_single_rejection_rejects_immediately():
    world = make_world(governance=CONSENSUS)
    svc = world.svc
    task = vote_ready_task(world)
    svc.cast_vote(world.pi.principal, task.task_id, VoteValue.APPROVE)
    svc.cast_vote(world.critic.principal, task.task_id, VoteValue.REJECT)
    assert svc.store.task(task.task_id).status is TaskStatus.REJECTED


def test_consensus_expiry_without_unanimity_voids():
    world = make_world(governance=CONSENSUS)
    svc = world.svc
    task = run_literature_task(world)
    svc.verify_task(world.pi.principal, task.task_id)
    svc.initiate_vote(world.pi.principal, task.task_id, window_seconds=100)
    svc.cast_vote(world.pi.principal, task.task_id, VoteValue.APPROVE)
    svc.cast_vote(world.scout.principal, task.task_id, VoteValue.APPROVE)
    world.clock.advance(100_000)
    svc.expire_vote(task.task_id)
    refreshed = svc.store.task(task.task_id)
    assert refreshed.status is TaskStatus.COMPLETED
    assert refreshed.vote.outcome == "voided"


def test_democratic_quorum_fraction_through_ballots():
    world = make_world(governance=democratic("2/3"))
    svc = world.svc
    task = vote_ready_task(world)
    # 5 active members, quorum ceil(10/3) = 4 substantive ballots
    svc.cast_vote(world.pi.principal, task.task_id, VoteValue.APPROVE)
    svc.cast_vote(world.scout.principal, task.task_id, VoteValue.APPROVE)
    svc.cast_vote(world.analyst.principal, task.task_id, VoteValue.APPROVE)
    assert svc.store.task(task.task_id).status is TaskStatus.VOTING
    svc.cast_vote(world.critic.principal, task.task_id, VoteValue.REJECT)
    assert svc.store.task(task.task_id).status is TaskStatus.ACCEPTED  # 3 > 1 at quorum


def test_vote_reopened_after_void_can_resolve():
    world = make_world()
    svc = world.svc
    task = run_literature_task(world)
    svc.verify_task(world.pi.principal, task.task_id)
    svc.initiate_vote(world.pi.principal, task.task_id, window_seconds=100)
    world.clock.advance(100_000)
    svc.expire_vote(task.task_id)
    assert svc.store.task(task.task_id).status is TaskStatus.COMPLETED
    # the verified work can go to a fresh vote without re-verification
    world.heartbeat_all()
    svc.initiate_vote(world.pi.principal, task.task_id, window_seconds=100)
    for member in (world.pi, world.scout, world.analyst):
        svc.cast_vote(member.principal, task.task_id, VoteValue.APPROVE)
    refreshed = svc.store.task(task.task_id)
    assert refreshed.status is TaskStatus.ACCEPTED
    assert len(refreshed.vote_history) == 2
    assert [v.outcome for v in refreshed.vote_history] == ["voided", "accepted"]
