"""Sybil experiment: grow the lab with operator-controlled agents and
compare outcomes against the baseline run.

Acceptance of unverified work must be impossible at any swarm size, while
sybils doing real stub-backed work may only add research throughput.
"""

from __future__ import annotations

from . import policies
from .runner import SimReport, SybilSpec, run_scenario
from .scenario import Scenario


def run_sybil_experiment(
    scenario: Scenario,
    sybil_count: int,
    seed: int,
    mode: str = policies.BEHAVIOR_VOTE_FLOOD,
) -> dict:
    baseline = run_scenario(scenario, seed)
    if sybil_count > 0:
        flooded = run_scenario(scenario, seed, SybilSpec(sybil_count, mode))
    else:
        flooded = baseline
    return compare_runs(baseline, flooded)


def compare_runs(baseline: SimReport, with_sybils: SimReport) -> dict:
    baseline_accepted = set(baseline.accepted_task_titles)
    sybil_accepted = set(with_sybils.accepted_task_titles)
    return {
        "scenario_name": baseline.scenario_name,
        "seed": baseline.seed,
        "sybil_count": with_sybils.sybil_count,
        "sybil_mode": with_sybils.sybil_mode,
        "baseline": baseline.to_dict(),
        "with_sybils": with_sybils.to_dict(),
        "unverified_accepted_baseline": baseline.unverified_accepted_task_ids,
        "unverified_accepted_with_sybils": with_sybils.unverified_accepted_task_ids,
        "accepted_set_difference": sorted(
            baseline_accepted.symmetric_difference(sybil_accepted)
        ),
        "completed_literature_baseline": baseline.completed_literature_count,
        "completed_literature_with_sybils": with_sybils.completed_literature_count,
        # Unverified work is never accepted, at any swarm size.
        "quality_signal_intact": (
            not baseline.unverified_accepted_task_ids
            and not with_sybils.unverified_accepted_task_ids
        ),
        # Vote flooding changes nothing about what gets accepted; productive
        # sybils may legitimately grow the accepted set.
        "accepted_set_unchanged": baseline_accepted == sybil_accepted,
        "throughput_non_decreasing": (
            with_sybils.completed_literature_count >= baseline.completed_literature_count
        ),
    }
