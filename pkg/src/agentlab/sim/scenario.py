"""Scenario files: declarative scripts for deterministic protocol runs.

A scenario names the lab, the agents (with join conditions), a staged task
plan with scripted result payloads, optional directives (e.g. heartbeat
freezes), and the assertions the run must satisfy.  The format is YAML;
see docs/scenario_format.md for the schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from ..domain import RoleArchetype, TaskType


class ScenarioParseError(Exception):
    pass


@dataclass
class TaskScript:
    task_type: TaskType
    title: str
    description: str = ""
    query: dict | None = None  # literature job request for the assignee
    analysis: dict | None = None  # analysis job request
    bibliography: list[dict] = field(default_factory=list)
    document: dict | None = None  # synthesis output: {title, body, media_type}
    evidence: bool = True  # False: completed bare, so verification fails
    summary: str = ""


@dataclass
class StageScript:
    trigger: dict
    tasks: list[TaskScript]
    triggered: bool = False


@dataclass
class AgentScript:
    name: str
    role: RoleArchetype
    soul: str = ""
    join_at_seconds: int | None = 0
    join_when: dict | None = None


@dataclass
class Directive:
    kind: str  # freeze_heartbeat
    agent_name: str
    from_seconds: int
    until_seconds: int | None = None


@dataclass
class Scenario:
    name: str
    lab_name: str
    governance: dict
    state: dict
    agents: list[AgentScript]
    stages: list[StageScript]
    assertions: list[dict]
    directives: list[Directive] = field(default_factory=list)
    horizon_seconds: int = 3600
    step_budget: int = 100_000
    vote_window_seconds: int = 600
    job_latency_seconds: int = 5
    min_accepted_sources: int = 2

    def script_for(self, title: str) -> TaskScript | None:
        for stage in self.stages:
            for script in stage.tasks:
                if script.title == title:
                    return script
        return None

    def sabotage_titles(self) -> list[str]:
        return [
            script.title
            for stage in self.stages
            for script in stage.tasks
            if not script.evidence
        ]


_KNOWN_TRIGGERS = {
    "at_start",
    "completed_literature_at_least",
    "accepted_tasks_at_least",
    "at_seconds",
}

_KNOWN_ASSERTIONS = {
    "task_count",
    "accepted_task_count_at_least",
    "accepted_synthesis_sources_at_least",
    "document_count",
    "synthesizer_join_to_completion_seconds_at_most",
    "human_action_count",
    "unverified_accepted_empty",
    "completed_task_count_at_least",
}


def _parse_task(raw: dict, index: str) -> TaskScript:
    try:
        task_type = TaskType(raw["type"])
        title = str(raw["title"])
    except (KeyError, ValueError) as exc:
        raise ScenarioParseError(f"task {index}: {exc}") from exc
    if not title.strip():
        raise ScenarioParseError(f"task {index}: empty title")
    expansion = raw.get("repeat", 1)
    if expansion != 1:
        raise ScenarioParseError(f"task {index}: use the backlog key for repetition")
    return TaskScript(
        task_type=task_type,
        title=title,
        description=str(raw.get("description", "")),
        query=raw.get("query"),
        analysis=raw.get("analysis"),
        bibliography=list(raw.get("bibliography", [])),
        document=raw.get("document"),
        evidence=bool(raw.get("evidence", True)),
        summary=str(raw.get("summary", "")),
    )


def _expand_backlog(raw: dict, index: str) -> list[TaskScript]:
    try:
        count = int(raw["count"])
        template = dict(raw["template"])
    except (KeyError, ValueError) as exc:
        raise ScenarioParseError(f"backlog {index}: {exc}") from exc
    tasks = []
    for i in range(1, count + 1):
        entry = dict(template)
        entry["title"] = str(template["title"]).format(i=i)
        if "description" in template:
            entry["description"] = str(template["description"]).format(i=i)
        tasks.append(_parse_task(entry, f"{index}[{i}]"))
    return tasks


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario root must be a mapping")
    try:
        lab = data["lab"]
        lab_name = str(lab["name"])
        state = dict(lab["state"])
        agents_raw = data["agents"]
        plan_raw = data["plan"]["stages"]
    except (KeyError, TypeError) as exc:
        raise ScenarioParseError(f"missing scenario section: {exc}") from exc

    agents = []
    for raw in agents_raw:
        try:
            role = RoleArchetype(raw["role"])
            name = str(raw["name"])
        except (KeyError, ValueError) as exc:
            raise ScenarioParseError(f"agent entry: {exc}") from exc
        join_when = raw.get("join_when")
        join_at = raw.get("join_at_seconds")
        if join_when is None and join_at is None:
            join_at = 0
        agents.append(
            AgentScript(
                name=name,
                role=role,
                soul=str(raw.get("soul", "")),
                join_at_seconds=int(join_at) if join_at is not None else None,
                join_when=join_when,
            )
        )
    if not any(a.role is RoleArchetype.PRINCIPAL_INVESTIGATOR for a in agents):
        raise ScenarioParseError("a scenario needs a principal_investigator agent")

    stages = []
    for stage_index, raw in enumerate(plan_raw):
        trigger = raw.get("trigger", {"at_start": True})
        if not set(trigger) <= _KNOWN_TRIGGERS:
            raise ScenarioParseError(
                f"stage {stage_index}: unknown trigger keys {set(trigger) - _KNOWN_TRIGGERS}"
            )
        tasks: list[TaskScript] = []
        for task_index, entry in enumerate(raw.get("propose", [])):
            tasks.append(_parse_task(entry, f"{stage_index}.{task_index}"))
        if "backlog" in raw:
            tasks.extend(_expand_backlog(raw["backlog"], str(stage_index)))
        stages.append(StageScript(trigger=trigger, tasks=tasks))

    assertions = list(data.get("assertions", []))
    for assertion in assertions:
        if assertion.get("check") not in _KNOWN_ASSERTIONS:
            raise ScenarioParseError(f"unknown assertion: {assertion.get('check')}")

    directives = []
    for raw in data.get("directives", []):
        if raw.get("kind") != "freeze_heartbeat":
            raise ScenarioParseError(f"unknown directive kind: {raw.get('kind')}")
        directives.append(
            Directive(
                kind="freeze_heartbeat",
                agent_name=str(raw["agent"]),
                from_seconds=int(raw["from_seconds"]),
                until_seconds=(
                    int(raw["until_seconds"]) if raw.get("until_seconds") is not None else None
                ),
            )
        )

    return Scenario(
        name=str(data.get("name", lab_name)),
        lab_name=lab_name,
        governance=dict(lab.get("governance", {"model": "pi_led"})),
        state=state,
        agents=agents,
        stages=stages,
        assertions=assertions,
        directives=directives,
        horizon_seconds=int(data.get("horizon_seconds", 3600)),
        step_budget=int(data.get("step_budget", 100_000)),
        vote_window_seconds=int(data.get("vote_window_seconds", 600)),
        job_latency_seconds=int(data.get("job_latency_seconds", 5)),
        min_accepted_sources=int(data.get("min_accepted_sources", 2)),
    )


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario from a path or a bundled scenario name."""
    path = Path(source)
    if not path.exists():
        bundled = resources.files("agentlab").joinpath("scenarios", f"{source}.yaml")
        if bundled.is_file():
            return parse_scenario(yaml.safe_load(bundled.read_text(encoding="utf-8")))
        raise ScenarioParseError(f"scenario not found: {source}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"cannot parse {path}: {exc}") from exc
    return parse_scenario(data)
