from __future__ import annotations

import json

import pytest
import yaml

from agentlab.cli import main as agentlab_main
from agentlab.config import ConfigError, ServiceConfig
from agentlab.sim.cli import main as sim_main

from conftest import make_world
from test_store import populate


def test_missing_config_aborts_nonzero(capsys):
    with pytest.raises(SystemExit) as excinfo:
        agentlab_main(["serve", "--config", "/nonexistent/cfg.yaml"])
    assert excinfo.value.code == 2
    assert "config error" in capsys.readouterr().err


def test_config_parse_error(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("store: {kind: warehouse}\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ServiceConfig.from_file(bad)
    weird = tmp_path / "weird.yaml"
    weird.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ServiceConfig.from_file(weird)


def test_config_defaults_and_overrides(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "store": {"kind": "file_backed", "path": str(tmp_path / "state")},
                "claim_threshold": 5,
                "observer_tokens": ["tok-1"],
            }
        ),
        encoding="utf-8",
    )
    config = ServiceConfig.from_file(path)
    assert config.heartbeat_ttl_seconds == 300  # default honored when absent
    assert config.vote_window_seconds == 3600
    assert config.min_accepted_sources == 2
    assert config.claim_threshold == 5
    assert config.observer_tokens == {"tok-1": "observer-1"}


def test_snapshot_and_replay_commands(tmp_path, capsys):
    world = make_world(
        store_kind="file_backed", store_path=str(tmp_path / "state")
    )
    populate(world)
    world.svc.save()
    config_path = tmp_path / "cfg.yaml"
    config_path.write_text(
        yaml.safe_dump({"store": {"kind": "file_backed", "path": str(tmp_path / "state")}}),
        encoding="utf-8",
    )
    out_path = tmp_path / "snapshot.json"
    assert agentlab_main(["snapshot", "--config", str(config_path), "--out", str(out_path)]) == 0
    printed = capsys.readouterr().out
    assert "domain_state_hash" in printed
    snapshot = json.loads(out_path.read_text(encoding="utf-8"))
    assert snapshot["domain"]["events"]

    assert agentlab_main(["replay", str(out_path)]) == 0
    assert "reproduces the snapshot state" in capsys.readouterr().out

    # a tampered log no longer reproduces the state
    message_event = next(
        e for e in snapshot["domain"]["events"] if e["kind"] == "message_posted"
    )
    message_event["payload"]["body"] = "forged"
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(snapshot), encoding="utf-8")
    assert agentlab_main(["replay", str(tampered)]) == 1


def test_sim_cli_run_and_report(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = sim_main(
        ["run", "protein_annotation", "--seed", "42", "--report", str(report_path)]
    )
    printed = capsys.readouterr().out
    assert code == 0
    assert printed.count("[PASS]") == 5
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["human_action_count"] == 0
    assert report["seed"] == 42


def test_sim_cli_sybil(capsys):
    code = sim_main(["sybil", "sybil_base", "--sybils", "2", "--seed", "1"])
    printed = capsys.readouterr().out
    assert code == 0
    assert "quality signal intact: True" in printed


def test_sim_cli_unknown_scenario(capsys):
    assert sim_main(["run", "/nope/missing.yaml", "--seed", "1"]) == 2
    assert "error" in capsys.readouterr().err
