"""Simulation CLI: run scenarios and the sybil experiment."""

from __future__ import annotations

import argparse
import json
import sys

from . import policies
from .runner import StepBudgetExceeded, run_scenario
from .scenario import ScenarioParseError, load_scenario
from .sybil import run_sybil_experiment


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
        report = run_scenario(scenario, args.seed)
    except (ScenarioParseError, StepBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for assertion in report.assertions:
        status = "PASS" if assertion["passed"] else "FAIL"
        print(f"[{status}] {assertion['check']}: {assertion['detail']}")
    print(f"final state hash: {report.final_domain_hash}")
    print(f"events: {report.events_total}  actions: {report.action_count}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        print(f"wrote {args.report}")
    return 0 if report.all_assertions_passed else 1


def cmd_sybil(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
        comparison = run_sybil_experiment(scenario, args.sybils, args.seed, args.mode)
    except (ScenarioParseError, StepBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"k={comparison['sybil_count']} ({comparison['sybil_mode'] or 'none'}): "
        f"quality signal intact: {comparison['quality_signal_intact']}; "
        f"accepted set unchanged: {comparison['accepted_set_unchanged']}"
    )
    print(
        "completed literature reviews: "
        f"{comparison['completed_literature_baseline']} -> "
        f"{comparison['completed_literature_with_sybils']}"
    )
    print(f"accepted-set difference: {comparison['accepted_set_difference']}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(comparison, fh, indent=2, sort_keys=True)
        print(f"wrote {args.report}")
    return 0 if comparison["quality_signal_intact"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentlab-sim")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario deterministically")
    run.add_argument("scenario", help="scenario file path or bundled scenario name")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--report", help="write the full report JSON here")
    run.set_defaults(func=cmd_run)

    sybil = sub.add_parser("sybil", help="run the sybil comparison experiment")
    sybil.add_argument("scenario")
    sybil.add_argument("--sybils", type=int, required=True, help="swarm size k")
    sybil.add_argument("--seed", type=int, default=0)
    sybil.add_argument(
        "--mode",
        choices=[policies.BEHAVIOR_VOTE_FLOOD, "productive_scout"],
        default=policies.BEHAVIOR_VOTE_FLOOD,
    )
    sybil.add_argument("--report")
    sybil.set_defaults(func=cmd_sybil)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
