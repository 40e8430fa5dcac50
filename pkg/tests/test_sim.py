from __future__ import annotations

import copy

import pytest
import yaml

from agentlab.domain import TaskStatus
from agentlab.sim import (
    ScenarioParseError,
    StepBudgetExceeded,
    load_scenario,
    run_scenario,
    run_sybil_experiment,
)
from agentlab.sim.runner import SybilSpec
from agentlab.sim.scenario import parse_scenario

MINI_SCENARIO = yaml.safe_load(
    """
name: mini
horizon_seconds: 1200
vote_window_seconds: 300
lab:
  name: Mini Lab
  governance: {model: pi_led}
  state:
    title: tiny state
    hypothesis: small things work
    objectives: [one]
agents:
  - {name: boss, role: principal_investigator, join_at_seconds: 0}
  - {name: runner, role: scout, join_at_seconds: 0}
plan:
  stages:
    - trigger: {at_start: true}
      propose:
        - type: literature_review
          title: single review
          query:
            research_question: protein domain misannotation
            source_databases: [arxiv, pubmed]
            result_limit: 3
          bibliography:
            - {title: entry, authors: a, venue: v, year: 2024, identifier: x:1}
assertions:
  - {check: task_count, task_type: literature_review, equals: 1}
  - {check: accepted_task_count_at_least, value: 1}
  - {check: human_action_count, equals: 0}
"""
)


def mini_scenario():
    return parse_scenario(copy.deepcopy(MINI_SCENARIO))


def test_scenario_parse_errors():
    with pytest.raises(ScenarioParseError):
        parse_scenario({"lab": {"name": "x"}})
    bad = copy.deepcopy(MINI_SCENARIO)
    bad["agents"] = [{"name": "solo", "role": "scout"}]
    with pytest.raises(ScenarioParseError):
        parse_scenario(bad)  # no PI
    bad = copy.deepcopy(MINI_SCENARIO)
    bad["assertions"] = [{"check": "unheard_of"}]
    with pytest.raises(ScenarioParseError):
        parse_scenario(bad)
    bad = copy.deepcopy(MINI_SCENARIO)
    bad["plan"]["stages"][0]["trigger"] = {"when_pigs_fly": 1}
    with pytest.raises(ScenarioParseError):
        parse_scenario(bad)
    with pytest.raises(ScenarioParseError):
        load_scenario("no_such_bundled_scenario")


def test_mini_scenario_accepts_the_review():
    report = run_scenario(mini_scenario(), seed=11)
    assert report.all_assertions_passed, report.assertions
    assert report.accepted_task_titles == ["single review"]


def test_protein_scenario_assertions_pass():
    report = run_scenario(load_scenario("protein_annotation"), seed=42)
    assert report.all_assertions_passed, report.assertions
    assert report.completed_literature_count == 5
    assert report.human_action_count == 0


def test_determinism_across_runs():
    reports = [run_scenario(load_scenario("protein_annotation"), seed=9) for _ in range(3)]
    hashes = {r.final_domain_hash for r in reports}
    global_hashes = {r.final_global_hash for r in reports}
    assert len(hashes) == 1
    assert len(global_hashes) == 1
    # the whole report reproduces bit for bit: serialized form, action trace,
    # and every wake time
    assert reports[0].to_dict() == reports[1].to_dict() == reports[2].to_dict()
    assert reports[0].trace == reports[1].trace == reports[2].trace
    assert reports[0].wake_times == reports[1].wake_times == reports[2].wake_times


def test_poll_intervals_within_contract():
    report = run_scenario(load_scenario("protein_annotation"), seed=3)
    for agent, wakes in report.wake_times.items():
        deltas = [b - a for a, b in zip(wakes, wakes[1:])]
        assert deltas, agent
        assert all(45_000 <= d <= 90_000 for d in deltas), (agent, deltas)


def test_accepted_tasks_have_ordered_audit_trail():
    scenario = load_scenario("protein_annotation")
    report = run_scenario(scenario, seed=21)
    # rebuild the event view from the report's own run
    # verify -> vote_initiated (by the PI) -> vote_resolved, in order, per task
    events = _rerun_events(scenario, seed=21)
    pi_id = report.agent_ids["Meridian"]
    accepted = {
        e.payload["task_id"]
        for e in events
        if e.kind == "vote_resolved" and e.payload["outcome"] == "accepted"
    }
    assert accepted
    for task_id in accepted:
        kinds = [e.kind for e in events if e.payload.get("task_id") == task_id]
        assert kinds.index("task_verified") < kinds.index("vote_initiated")
        assert kinds.index("vote_initiated") < kinds.index("vote_resolved")
        initiators = [
            e.actor
            for e in events
            if e.kind == "vote_initiated" and e.payload.get("task_id") == task_id
        ]
        assert initiators == [pi_id]


def _rerun_events(scenario, seed):
    from agentlab.sim.runner import SimContext  # reuse the runner's service wiring

    # run again deterministically and capture the final event log
    report_ctx = {}
    import agentlab.sim.runner as runner_mod

    original_build = runner_mod._build_report

    def capture(ctx):
        report_ctx["events"] = list(ctx.service.store.events)
        return original_build(ctx)

    runner_mod._build_report = capture
    try:
        run_scenario(scenario, seed)
    finally:
        runner_mod._build_report = original_build
    return report_ctx["events"]


def test_heartbeat_freeze_directive_makes_agent_stale():
    scenario = mini_scenario()
    scenario.directives.append(
        __import__("agentlab.sim.scenario", fromlist=["Directive"]).Directive(
            kind="freeze_heartbeat", agent_name="runner", from_seconds=200
        )
    )
    report = run_scenario(scenario, seed=5)
    stale_polls = [
        entry
        for entry in report.trace
        if entry["agent"] == "runner"
        and entry["action"] == "poll"
        and not entry["ok"]
        and entry["error"] == "StaleAgent"
    ]
    assert stale_polls
    assert min(e["t"] for e in stale_polls) > 500_000  # 200 s freeze + 300 s TTL


def test_step_budget_enforced():
    scenario = mini_scenario()
    scenario.step_budget = 10
    with pytest.raises(StepBudgetExceeded):
        run_scenario(scenario, seed=1)


def test_sybil_zero_is_the_baseline():
    scenario = load_scenario("sybil_base")
    comparison = run_sybil_experiment(scenario, 0, seed=2)
    assert comparison["baseline"] == comparison["with_sybils"]
    assert comparison["accepted_set_difference"] == []


def test_small_flood_keeps_quality_signal():
    scenario = load_scenario("sybil_base")
    comparison = run_sybil_experiment(scenario, 2, seed=2)
    assert comparison["quality_signal_intact"]
    assert comparison["unverified_accepted_baseline"] == []
    assert comparison["unverified_accepted_with_sybils"] == []
    # anything newly accepted under flooding is still verified work; the
    # flood can speed up marginal vote resolution but never smuggle work in
    assert "Unverifiable shortcut review" not in comparison["with_sybils"][
        "accepted_task_titles"
    ]


def test_flood_sybils_cannot_push_unverified_task_into_voting():
    scenario = load_scenario("sybil_base")
    report = run_scenario(scenario, seed=2, sybils=SybilSpec(3, "vote_flood"))
    flood_attempts = [
        e for e in report.trace if e["action"].startswith("flood_") and e["ok"]
    ]
    assert flood_attempts == []  # every attempt bounced off the protocol
    assert report.unverified_accepted_task_ids == []
