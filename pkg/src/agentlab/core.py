"""The coordination service: one object exposing every protocol operation.

Module logic lives next to its entities (governance, tasklife, dispatch,
providers, commons, docstore); this class wires them to a shared store,
clock, and activity log, and serializes mutations behind one lock so
per-entity atomicity contracts hold under concurrent callers.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from importlib import resources
from pathlib import Path

from . import commons, dispatch, docstore, governance, providers, tasklife
from .auth import KIND_AGENT, KIND_HUMAN, Principal
from .clock import Clock, SystemClock
from .config import ServiceConfig
from .domain import (
    GovernanceModel,
    LabStateStatus,
    TaskStatus,
    TaskType,
    VoteValue,
)
from .errors import Unauthorized
from .events import append_event
from .store import FileBackend, MemoryBackend, Store
from .util import IdFactory, TokenFactory


def _fixture_path(name: str) -> Path:
    return Path(str(resources.files("agentlab").joinpath("fixtures", name)))


class LabService:
    def __init__(
        self,
        config: ServiceConfig | None = None,
        clock: Clock | None = None,
        backend=None,
    ):
        self.config = config or ServiceConfig()
        self.clock = clock or SystemClock()
        if backend is None:
            if self.config.store_kind == "file_backed":
                backend = FileBackend(self.config.store_path)
            else:
                backend = MemoryBackend()
        self.backend = backend
        self.store: Store = backend.load() or Store()
        self.ids = IdFactory(self.store.counters)  # counters persist with the store
        self.tokens = TokenFactory(self.config.rng_seed)
        self._lock = threading.RLock()
        self._pinned_now: int | None = None
        self._literature_backend = None
        self._analysis_backend = None
        self._pool: ThreadPoolExecutor | None = None
        if self.config.job_execution == "pool":
            self._pool = ThreadPoolExecutor(
                max_workers=self.config.job_pool_workers,
                thread_name_prefix="provider-job",
            )

    # -- plumbing -------------------------------------------------------------

    @contextmanager
    def _op(self):
        """Serialize one operation and pin its timestamp.

        Every now() read inside a single operation (including nested
        operations like a critique's auto-proposed alternative) sees the
        same instant, so entity timestamps and their activity events agree
        and the event log replays exactly.
        """
        with self._lock:
            outermost = self._pinned_now is None
            if outermost:
                self._pinned_now = self.clock.now_ms()
            try:
                yield
            finally:
                if outermost:
                    self._pinned_now = None

    def now(self) -> int:
        if self._pinned_now is not None:
            return self._pinned_now
        return self.clock.now_ms()

    def emit(self, kind: str, actor: str, lab_id: str | None, payload: dict):
        return append_event(self.store.events, self.now(), actor, lab_id, kind, payload)

    def authenticate(self, token: str | None) -> Principal:
        if token:
            for record in self.store.agents.values():
                if record.auth_token == token:
                    return Principal(KIND_AGENT, record.agent_id, token)
            name = self.config.observer_tokens.get(token)
            if name is not None:
                return Principal(KIND_HUMAN, f"human:{name}", token)
        raise Unauthorized("missing or unknown token")

    def agent_is_active(self, agent_id: str) -> bool:
        record = self.store.agent(agent_id)
        return dispatch.is_active(record, self.now(), self.config.heartbeat_ttl_seconds)

    def active_member_count(self, lab_id: str) -> int:
        return dispatch.active_members(self, self.store.lab(lab_id), self.now())

    def tasks_of_lab(self, lab_id: str) -> list:
        return sorted(
            (t for t in self.store.tasks.values() if t.lab_id == lab_id),
            key=lambda t: _id_sort_key(t.task_id),
        )

    def save(self) -> None:
        with self._op():
            self.backend.save(self.store)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
        self.save()

    # -- provider backends ------------------------------------------------------

    def literature_sources(self) -> frozenset[str]:
        return providers.DEFAULT_SOURCE_DATABASES | frozenset(
            self.config.literature.extra_sources
        )

    def literature_backend(self):
        if self._literature_backend is None:
            settings = self.config.literature
            if settings.backend == "http":
                self._literature_backend = providers.HttpLiteratureBackend(
                    settings.base_url, settings.resolve_credential() or ""
                )
            else:
                corpus = settings.corpus_path or _fixture_path("literature_corpus.json")
                self._literature_backend = providers.StubLiteratureBackend.from_path(
                    Path(corpus)
                )
        return self._literature_backend

    def analysis_backend(self):
        if self._analysis_backend is None:
            settings = self.config.analysis
            if settings.backend == "http":
                self._analysis_backend = providers.HttpAnalysisBackend(
                    settings.base_url, settings.resolve_credential() or ""
                )
            else:
                self._analysis_backend = providers.StubAnalysisBackend()
        return self._analysis_backend

    def resolve_dataset(self, uri: str) -> bytes | None:
        """Fetch dataset bytes for analysis jobs; local files only.

        Paths resolve inside the configured data root (bundled fixtures by
        default); escapes are refused rather than followed.
        """
        root = Path(self.config.analysis.data_root or _fixture_path("datasets"))
        if uri.startswith("fixture:"):
            candidate = _fixture_path("datasets") / uri[len("fixture:"):]
            root = _fixture_path("datasets")
        elif uri.startswith("file://"):
            candidate = Path(uri[len("file://"):])
        else:
            candidate = root / uri
        try:
            resolved = candidate.resolve()
            resolved.relative_to(root.resolve())
        except (OSError, ValueError):
            return None
        if not resolved.is_file():
            return None
        return resolved.read_bytes()

    # -- registry / dispatch -----------------------------------------------------

    def register_agent(self, display_name: str, soul_document: str = ""):
        with self._op():
            return dispatch.register_agent(self, display_name, soul_document)

    def heartbeat(self, actor: Principal):
        with self._op():
            return dispatch.heartbeat(self, actor)

    def poll_work(self, actor: Principal):
        with self._op():
            return dispatch.poll_work(self, actor)

    def protocol_document(self, lab_id: str, agent_id: str) -> dict:
        with self._op():
            return dispatch.render_protocol_document(self, lab_id, agent_id)

    # -- forum ---------------------------------------------------------------------

    def create_post(self, actor: Principal, title: str, body: str):
        with self._op():
            return commons.create_post(self, actor, title, body)

    def upvote_post(self, actor: Principal, post_id: str):
        with self._op():
            return commons.upvote_post(self, actor, post_id)

    def comment_post(self, actor: Principal, post_id: str, body: str):
        with self._op():
            return commons.comment_post(self, actor, post_id, body)

    def claim_post(self, actor: Principal, post_id: str):
        with self._op():
            return commons.claim_post(self, actor, post_id)

    # -- labs and states ---------------------------------------------------------

    def create_lab(
        self,
        actor: Principal,
        name: str,
        pi_agent_id: str,
        governance_model: GovernanceModel,
        source_post_id: str | None = None,
    ):
        with self._op():
            if source_post_id is not None:
                post = commons.check_post_claimable(self, actor, source_post_id)
                if post.claimed_by_actor is None:
                    commons.claim_post(self, actor, source_post_id)
            return governance.create_lab(
                self, actor, name, pi_agent_id, governance_model, source_post_id
            )

    def add_member(self, actor: Principal, lab_id: str, agent_id: str, role):
        with self._op():
            return governance.add_member(self, actor, lab_id, agent_id, role)

    def create_state(
        self,
        actor: Principal,
        lab_id: str,
        title: str,
        hypothesis: str,
        objectives: list[str],
    ):
        with self._op():
            return governance.create_state(self, actor, lab_id, title, hypothesis, objectives)

    def activate_state(self, actor: Principal, state_id: str):
        with self._op():
            return governance.activate_state(self, actor, state_id)

    def conclude_state(self, actor: Principal, state_id: str, conclusion: LabStateStatus):
        with self._op():
            return governance.conclude_state(self, actor, state_id, conclusion)

    # -- tasks ----------------------------------------------------------------------

    def propose_task(
        self,
        actor: Principal,
        lab_id: str,
        task_type: TaskType,
        title: str,
        description: str = "",
    ):
        with self._op():
            return tasklife.propose_task(self, actor, lab_id, task_type, title, description)

    def claim_task(self, actor: Principal, task_id: str):
        with self._op():
            return tasklife.claim_task(self, actor, task_id)

    def complete_task(self, actor: Principal, task_id: str, result):
        with self._op():
            if isinstance(result, dict):
                result = tasklife.TaskResult.from_dict(result)
            return tasklife.complete_task(self, actor, task_id, result)

    def file_critique(
        self,
        actor: Principal,
        task_id: str,
        issues: list[str],
        alternative_proposal: dict | None = None,
    ):
        with self._op():
            return tasklife.file_critique(self, actor, task_id, issues, alternative_proposal)

    def resolve_critique(
        self,
        actor: Principal,
        critique_id: str,
        disposition: str,
        resolution_note: str | None = None,
    ):
        with self._op():
            return tasklife.resolve_critique(
                self, actor, critique_id, disposition, resolution_note
            )

    def verify_task(self, actor: Principal, task_id: str):
        with self._op():
            return tasklife.verify_task(self, actor, task_id)

    def initiate_vote(self, actor: Principal, task_id: str, window_seconds: int | None = None):
        with self._op():
            return tasklife.initiate_vote(self, actor, task_id, window_seconds)

    def cast_vote(self, actor: Principal, task_id: str, value: VoteValue):
        with self._op():
            return tasklife.cast_vote(self, actor, task_id, value)

    def expire_vote(self, task_id: str):
        with self._op():
            return tasklife.expire_vote(self, task_id)

    def expire_due_votes(self) -> list[str]:
        """Maintenance sweep; resolves every vote whose window has elapsed."""
        with self._op():
            now = self.now()
            expired = []
            for task in list(self.store.tasks.values()):
                vote = task.vote
                if (
                    task.status is TaskStatus.VOTING
                    and vote is not None
                    and vote.open
                    and now >= vote.expires_at_ms()
                ):
                    tasklife.expire_vote(self, task.task_id)
                    expired.append(task.task_id)
            return expired

    def supersede_task(self, actor: Principal, task_id: str, successor_task_id: str):
        with self._op():
            return tasklife.supersede_task(self, actor, task_id, successor_task_id)

    # -- providers --------------------------------------------------------------------

    def submit_literature_job(self, actor: Principal, lab_id: str, query):
        with self._op():
            if isinstance(query, dict):
                query = providers.LiteratureQuery.from_dict(query)
            job = providers.submit_literature_job(self, actor, lab_id, query)
        self._maybe_execute_async(job.job_id)
        return job

    def submit_analysis_job(self, actor: Principal, lab_id: str, request):
        with self._op():
            if isinstance(request, dict):
                request = providers.AnalysisRequest.from_dict(request)
            job = providers.submit_analysis_job(self, actor, lab_id, request)
        self._maybe_execute_async(job.job_id)
        return job

    def execute_job(self, job_id: str):
        with self._op():
            return providers.execute_job(self, job_id)

    def _maybe_execute_async(self, job_id: str) -> None:
        if self._pool is not None:
            self._pool.submit(self.execute_job, job_id)

    def get_job(self, actor: Principal, job_id: str):
        with self._op():
            return providers.get_job(self, actor, job_id)

    # -- suggestions / discussion / activity ---------------------------------------------

    def post_suggestion(self, actor: Principal, lab_id: str, body: str):
        with self._op():
            return commons.post_suggestion(self, actor, lab_id, body)

    def convert_suggestion(
        self,
        actor: Principal,
        suggestion_id: str,
        task_type: TaskType,
        title: str | None = None,
        description: str | None = None,
    ):
        with self._op():
            return commons.convert_suggestion(
                self, actor, suggestion_id, task_type, title, description
            )

    def decline_suggestion(self, actor: Principal, suggestion_id: str):
        with self._op():
            return commons.decline_suggestion(self, actor, suggestion_id)

    def post_message(
        self,
        actor: Principal,
        lab_id: str,
        body: str,
        scope: str = commons.SCOPE_LAB,
        parent_id: str | None = None,
    ):
        with self._op():
            return commons.post_message(self, actor, lab_id, body, scope, parent_id)

    def query_activity(self, **filters):
        with self._op():
            return commons.query_activity(self, **filters)

    def export_activity(self) -> str:
        with self._op():
            return commons.export_activity(self)

    # -- documents -----------------------------------------------------------------------

    def upload_document(
        self,
        actor: Principal,
        lab_id: str,
        title: str,
        content: bytes,
        media_type: str = "text/markdown",
    ):
        with self._op():
            return docstore.upload_document(self, actor, lab_id, title, content, media_type)

    def get_document(self, document_id: str):
        with self._op():
            return docstore.get_document(self, document_id)

    def list_documents(self, lab_id: str):
        with self._op():
            return docstore.list_documents(self, lab_id)

    # -- read views -------------------------------------------------------------------------

    def lab_overview(self, lab_id: str) -> dict:
        with self._op():
            lab = self.store.lab(lab_id)
            now = self.now()
            ttl = self.config.heartbeat_ttl_seconds
            states = sorted(
                (s for s in self.store.lab_states.values() if s.lab_id == lab_id),
                key=lambda s: s.version,
            )
            current = governance.active_state(self, lab_id)
            members = []
            for agent_id, role in sorted(lab.member_roles.items()):
                record = self.store.agent(agent_id)
                members.append(
                    {
                        "agent_id": agent_id,
                        "display_name": record.display_name,
                        "role": role.value,
                        "last_heartbeat": record.last_heartbeat,
                        "active": dispatch.is_active(record, now, ttl),
                    }
                )
            tasks = [t.summary_dict() for t in self.tasks_of_lab(lab_id)]
            status_counts: dict[str, int] = {}
            for task in tasks:
                status_counts[task["status"]] = status_counts.get(task["status"], 0) + 1
            return {
                "lab": lab.to_dict(),
                "server_time": now,
                "active_state": current.to_dict() if current else None,
                "states": [s.to_dict() for s in states],
                "members": members,
                "tasks": tasks,
                "task_status_counts": status_counts,
            }

    def get_task(self, task_id: str) -> dict:
        with self._op():
            task = self.store.task(task_id)
            out = task.to_dict()
            out["critiques"] = [
                self.store.critique(cid).to_dict() for cid in task.critique_ids
            ]
            records = self.store.verifications.get(task_id, [])
            out["verification"] = records[-1].to_dict() if records else None
            return out

    def list_suggestions(self, lab_id: str) -> list[dict]:
        with self._op():
            self.store.lab(lab_id)
            return [
                s.to_dict()
                for s in sorted(
                    self.store.suggestions.values(),
                    key=lambda s: _id_sort_key(s.suggestion_id),
                )
                if s.lab_id == lab_id
            ]

    def list_messages(self, lab_id: str) -> list[dict]:
        with self._op():
            self.store.lab(lab_id)
            return [
                m.to_dict()
                for m in sorted(
                    self.store.messages.values(),
                    key=lambda m: _id_sort_key(m.message_id),
                )
                if m.lab_id == lab_id
            ]

    def list_posts(self) -> list[dict]:
        with self._op():
            return [
                p.to_dict()
                for p in sorted(
                    self.store.posts.values(), key=lambda p: _id_sort_key(p.post_id)
                )
            ]


def _id_sort_key(entity_id: str) -> tuple[str, int]:
    prefix, _, suffix = entity_id.rpartition("-")
    return (prefix, int(suffix)) if suffix.isdigit() else (entity_id, 0)
