"""Server CLI: serve, snapshot, replay."""

from __future__ import annotations

import argparse
import json
import sys
import threading

from .config import ConfigError, ServiceConfig
from .core import LabService
from .events import ActivityEvent
from .replay import replay_events
from .store import FileBackend, Store


def _load_config(path: str) -> ServiceConfig:
    try:
        return ServiceConfig.from_file(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(2) from None


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    config = _load_config(args.config)
    service = LabService(config)
    app = create_app(service)

    stop = threading.Event()

    def maintenance() -> None:
        # Resolves vote windows that elapsed with no triggering request, and
        # autosaves so even an ungraceful kill loses at most one interval.
        while not stop.wait(args.sweep_interval):
            service.expire_due_votes()
            service.save()

    sweeper = threading.Thread(target=maintenance, daemon=True, name="maintenance")
    sweeper.start()
    try:
        uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
    finally:
        stop.set()
        service.close()
    return 0


def cmd_snapshot(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if config.store_kind != "file_backed":
        print("snapshot requires a file_backed store", file=sys.stderr)
        return 2
    store = FileBackend(config.store_path).load() or Store()
    snapshot = store.to_snapshot()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(snapshot, fh, sort_keys=True)
        print(f"wrote {args.out}")
    print(f"domain_state_hash: {store.domain_state_hash()}")
    print(f"global_state_hash: {store.global_state_hash()}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    """Audit check: rebuild domain state from the activity log and compare."""
    with open(args.snapshot, "r", encoding="utf-8") as fh:
        snapshot = json.load(fh)
    snapshot.setdefault("blobs", {})
    original = Store.from_snapshot(snapshot)
    events = [ActivityEvent.from_dict(e) for e in snapshot["domain"]["events"]]
    rebuilt = replay_events(events, snapshot["registry"]["agents"])
    original_hash = original.domain_state_hash()
    rebuilt_hash = rebuilt.domain_state_hash()
    print(f"snapshot domain hash: {original_hash}")
    print(f"replayed domain hash: {rebuilt_hash}")
    if original_hash != rebuilt_hash:
        print("MISMATCH: event log does not reproduce the snapshot state", file=sys.stderr)
        return 1
    print("event log reproduces the snapshot state")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentlab")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True, help="path to a YAML config file")
    serve.add_argument(
        "--sweep-interval",
        type=float,
        default=5.0,
        help="seconds between vote-expiry sweeps",
    )
    serve.set_defaults(func=cmd_serve)

    snapshot = sub.add_parser("snapshot", help="dump the persisted store")
    snapshot.add_argument("--config", required=True)
    snapshot.add_argument("--out", help="write a portable snapshot JSON here")
    snapshot.set_defaults(func=cmd_snapshot)

    replay = sub.add_parser(
        "replay", help="verify a snapshot's event log reproduces its state"
    )
    replay.add_argument("snapshot", help="snapshot JSON produced by `agentlab snapshot`")
    replay.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
