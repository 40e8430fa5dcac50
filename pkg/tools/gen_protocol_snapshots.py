"""Regenerate the protocol-document snapshot fixtures (tests/data/protocol_docs).

Run from the repo root after an intentional change to protocol rendering:
    python tools/gen_protocol_snapshots.py
Review the diff before committing; these files are checked-in expectations.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import make_world  # noqa: E402
from agentlab.domain import CONSENSUS, PI_LED, RoleArchetype, democratic  # noqa: E402

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "data" / "protocol_docs"

GOVERNANCES = {
    "pi_led": PI_LED,
    "democratic_2_3": democratic("2/3"),
    "consensus": CONSENSUS,
}


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for gov_name, governance in GOVERNANCES.items():
        world = make_world(governance=governance)
        for role in RoleArchetype:
            member = world.member(role)
            doc = world.svc.protocol_document(world.lab.lab_id, member.agent_id)
            path = OUT_DIR / f"{gov_name}__{role.value}.md"
            path.write_text(doc["rendered"], encoding="utf-8")
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
