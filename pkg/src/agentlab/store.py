"""Shared persistence substrate: an in-memory store with snapshot/load
round-tripping, a file backend, and the canonical state hashes.

The store is the single source of truth; the activity log it carries is the
replay artifact (see replay.py for the equivalence check).
"""

from __future__ import annotations

import base64
import json
import os
import tempfile
from pathlib import Path

from .commons import DiscussionMessage, ForumPost, Suggestion
from .dispatch import AgentRecord
from .docstore import DocumentRecord
from .errors import (
    DanglingReference,
    UnknownAgent,
    UnknownCritique,
    UnknownJob,
    UnknownLab,
    UnknownPost,
    UnknownState,
    UnknownSuggestion,
    UnknownTask,
)
from .events import ActivityEvent
from .governance import Lab, LabState
from .providers import ProviderJob
from .tasklife import Critique, Task, VerificationRecord
from .util import hash_payload

SNAPSHOT_VERSION = 1


class Store:
    """All protocol state, grouped by entity section."""

    def __init__(self):
        self.agents: dict[str, AgentRecord] = {}
        self.labs: dict[str, Lab] = {}
        self.lab_states: dict[str, LabState] = {}
        self.tasks: dict[str, Task] = {}
        self.critiques: dict[str, Critique] = {}
        self.verifications: dict[str, list[VerificationRecord]] = {}
        self.posts: dict[str, ForumPost] = {}
        self.suggestions: dict[str, Suggestion] = {}
        self.messages: dict[str, DiscussionMessage] = {}
        self.jobs: dict[str, ProviderJob] = {}
        self.documents: dict[str, DocumentRecord] = {}
        self.blobs: dict[str, bytes] = {}
        self.events: list[ActivityEvent] = []
        self.counters: dict[str, int] = {}

    # -- checked accessors ---------------------------------------------------

    def agent(self, agent_id: str) -> AgentRecord:
        try:
            return self.agents[agent_id]
        except KeyError:
            raise UnknownAgent(f"unknown agent {agent_id}") from None

    def lab(self, lab_id: str) -> Lab:
        try:
            return self.labs[lab_id]
        except KeyError:
            raise UnknownLab(f"unknown lab {lab_id}") from None

    def lab_state(self, state_id: str) -> LabState:
        try:
            return self.lab_states[state_id]
        except KeyError:
            raise UnknownState(f"unknown lab state {state_id}") from None

    def task(self, task_id: str) -> Task:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise UnknownTask(f"unknown task {task_id}") from None

    def critique(self, critique_id: str) -> Critique:
        try:
            return self.critiques[critique_id]
        except KeyError:
            raise UnknownCritique(f"unknown critique {critique_id}") from None

    def post(self, post_id: str) -> ForumPost:
        try:
            return self.posts[post_id]
        except KeyError:
            raise UnknownPost(f"unknown post {post_id}") from None

    def suggestion(self, suggestion_id: str) -> Suggestion:
        try:
            return self.suggestions[suggestion_id]
        except KeyError:
            raise UnknownSuggestion(f"unknown suggestion {suggestion_id}") from None

    def message(self, message_id: str) -> DiscussionMessage:
        try:
            return self.messages[message_id]
        except KeyError:
            # only ever looked up as a reply parent, so a missing id is a
            # dangling reference in the caller's payload
            raise DanglingReference(f"unknown parent message {message_id}") from None

    def job(self, job_id: str) -> ProviderJob:
        try:
            return self.jobs[job_id]
        except KeyError:
            raise UnknownJob(f"unknown provider job {job_id}") from None

    # -- serialization ---------------------------------------------------------

    def domain_state_dict(self) -> dict:
        """Everything reconstructable from the activity log (not the registry)."""
        return {
            "labs": {k: v.to_dict() for k, v in sorted(self.labs.items())},
            "lab_states": {k: v.to_dict() for k, v in sorted(self.lab_states.items())},
            "tasks": {k: v.to_dict() for k, v in sorted(self.tasks.items())},
            "critiques": {k: v.to_dict() for k, v in sorted(self.critiques.items())},
            "verifications": {
                task_id: [r.to_dict() for r in records]
                for task_id, records in sorted(self.verifications.items())
            },
            "posts": {k: v.to_dict() for k, v in sorted(self.posts.items())},
            "suggestions": {k: v.to_dict() for k, v in sorted(self.suggestions.items())},
            "messages": {k: v.to_dict() for k, v in sorted(self.messages.items())},
            "jobs": {k: v.to_dict() for k, v in sorted(self.jobs.items())},
            "documents": {k: v.to_dict() for k, v in sorted(self.documents.items())},
            # blob ids are content hashes, so listing them pins the bytes
            "blob_ids": sorted(self.blobs),
            "events": [e.to_dict() for e in self.events],
        }

    def registry_state_dict(self) -> dict:
        return {"agents": {k: v.to_dict() for k, v in sorted(self.agents.items())}}

    def domain_state_hash(self) -> str:
        return hash_payload(self.domain_state_dict())

    def global_state_hash(self) -> str:
        return hash_payload(
            {
                "domain": self.domain_state_dict(),
                "registry": self.registry_state_dict(),
                "counters": dict(sorted(self.counters.items())),
            }
        )

    def to_snapshot(self) -> dict:
        return {
            "snapshot_version": SNAPSHOT_VERSION,
            "domain": self.domain_state_dict(),
            "registry": self.registry_state_dict(),
            "counters": dict(sorted(self.counters.items())),
            "blobs": {
                blob_id: base64.b64encode(content).decode("ascii")
                for blob_id, content in sorted(self.blobs.items())
            },
        }

    @classmethod
    def from_snapshot(cls, snapshot: dict) -> "Store":
        store = cls()
        domain = snapshot["domain"]
        store.labs = {k: Lab.from_dict(v) for k, v in domain["labs"].items()}
        store.lab_states = {
            k: LabState.from_dict(v) for k, v in domain["lab_states"].items()
        }
        store.tasks = {k: Task.from_dict(v) for k, v in domain["tasks"].items()}
        store.critiques = {
            k: Critique.from_dict(v) for k, v in domain["critiques"].items()
        }
        store.verifications = {
            task_id: [VerificationRecord.from_dict(r) for r in records]
            for task_id, records in domain["verifications"].items()
        }
        store.posts = {k: ForumPost.from_dict(v) for k, v in domain["posts"].items()}
        store.suggestions = {
            k: Suggestion.from_dict(v) for k, v in domain["suggestions"].items()
        }
        store.messages = {
            k: DiscussionMessage.from_dict(v) for k, v in domain["messages"].items()
        }
        store.jobs = {k: ProviderJob.from_dict(v) for k, v in domain["jobs"].items()}
        store.documents = {
            k: DocumentRecord.from_dict(v) for k, v in domain["documents"].items()
        }
        store.events = [ActivityEvent.from_dict(e) for e in domain["events"]]
        store.agents = {
            k: AgentRecord.from_dict(v) for k, v in snapshot["registry"]["agents"].items()
        }
        store.counters = dict(snapshot.get("counters", {}))
        store.blobs = {
            blob_id: base64.b64decode(content)
            for blob_id, content in snapshot.get("blobs", {}).items()
        }
        return store


# ---------------------------------------------------------------------------
# backends


class MemoryBackend:
    """No persistence; every process starts empty."""

    def load(self) -> Store | None:
        return None

    def save(self, store: Store) -> None:
        pass


class FileBackend:
    """File-backed layout: one file per blob named by its hash, plus a
    snapshot index of all records."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.blob_dir = self.root / "blobs"
        self.snapshot_path = self.root / "snapshot.json"

    def load(self) -> Store | None:
        if not self.snapshot_path.exists():
            return None
        with open(self.snapshot_path, "r", encoding="utf-8") as fh:
            snapshot = json.load(fh)
        snapshot.setdefault("blobs", {})
        store = Store.from_snapshot(snapshot)
        if self.blob_dir.exists():
            for blob_path in self.blob_dir.iterdir():
                store.blobs[blob_path.name] = blob_path.read_bytes()
        return store

    def save(self, store: Store) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.blob_dir.mkdir(parents=True, exist_ok=True)
        for blob_id, content in store.blobs.items():
            blob_path = self.blob_dir / blob_id
            if not blob_path.exists():
                blob_path.write_bytes(content)
        snapshot = store.to_snapshot()
        snapshot.pop("blobs")  # blobs live as individual files
        fd, tmp_path = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(snapshot, fh, sort_keys=True)
            os.replace(tmp_path, self.snapshot_path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
