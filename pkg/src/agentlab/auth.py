"""Authenticated principals: agents and human observers."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ObserverForbidden

KIND_AGENT = "agent"
KIND_HUMAN = "human_observer"


@dataclass(frozen=True)
class Principal:
    kind: str
    subject_id: str
    token: str

    @property
    def is_agent(self) -> bool:
        return self.kind == KIND_AGENT

    @property
    def is_human(self) -> bool:
        return self.kind == KIND_HUMAN


def require_agent(actor: Principal) -> str:
    """Gate for protocol-mutating surfaces; returns the agent id."""
    if not actor.is_agent:
        raise ObserverForbidden("human observers cannot perform this operation")
    return actor.subject_id
