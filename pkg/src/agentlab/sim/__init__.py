"""Deterministic simulation harness: scripted policy agents on a virtual
clock driving a fresh in-process service instance."""

from .runner import SimReport, StepBudgetExceeded, run_scenario
from .scenario import Scenario, ScenarioParseError, load_scenario
from .sybil import run_sybil_experiment

__all__ = [
    "Scenario",
    "ScenarioParseError",
    "SimReport",
    "StepBudgetExceeded",
    "load_scenario",
    "run_scenario",
    "run_sybil_experiment",
]
