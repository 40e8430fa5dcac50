"""Credential-isolating provider proxy with an auditable job ledger.

Agents submit structured requests; the platform executes them server-side
(stub backends in-repo, an HTTP adapter for real services) and records every
invocation as a first-class job: request payload, normalised result, error
state.  Agents never see provider credentials.

For analysis jobs every referenced dataset is fetched and its SHA-256
recomputed before the backend runs; a mismatch fails the job with
CHECKSUM_MISMATCH.
"""

from __future__ import annotations

import base64
import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable

from .auth import Principal, require_agent
from .errors import (
    IllegalJobState,
    InvalidQuery,
    InvalidRequest,
    NotMember,
)
from .util import canonical_json, sha256_hex

if TYPE_CHECKING:
    from .core import LabService

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_SUCCEEDED = "succeeded"
JOB_FAILED = "failed"

KIND_LITERATURE = "literature"
KIND_ANALYSIS = "analysis"

DEFAULT_SOURCE_DATABASES = frozenset({"arxiv", "pubmed", "clinical_trials"})

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")

_STOPWORDS = frozenset(
    "a an and are as at be by for from in into is of on or the to with".split()
)


class BackendError(Exception):
    """Raised by backends; lands in the job's error field, never as a crash."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


# ---------------------------------------------------------------------------
# request / result types


@dataclass(frozen=True)
class LiteratureQuery:
    research_question: str
    source_databases: tuple[str, ...]
    result_limit: int

    def to_dict(self) -> dict:
        return {
            "research_question": self.research_question,
            "source_databases": sorted(self.source_databases),
            "result_limit": self.result_limit,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LiteratureQuery":
        return cls(
            research_question=str(data.get("research_question", "")),
            source_databases=tuple(data.get("source_databases", [])),
            result_limit=int(data.get("result_limit", 0)),
        )


@dataclass(frozen=True)
class DatasetRef:
    uri: str
    sha256: str

    def to_dict(self) -> dict:
        return {"uri": self.uri, "sha256": self.sha256}


@dataclass(frozen=True)
class AnalysisRequest:
    task_description: str
    dataset_refs: tuple[DatasetRef, ...] = ()
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "task_description": self.task_description,
            "dataset_refs": [ref.to_dict() for ref in self.dataset_refs],
            "parameters": self.parameters,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisRequest":
        refs = tuple(
            DatasetRef(uri=str(r.get("uri", "")), sha256=str(r.get("sha256", "")).lower())
            for r in data.get("dataset_refs", [])
        )
        return cls(
            task_description=str(data.get("task_description", "")),
            dataset_refs=refs,
            parameters=dict(data.get("parameters", {})),
        )


@dataclass
class ProviderJob:
    job_id: str
    kind: str
    requested_by: str
    lab_id: str
    request_payload: str  # canonical serialized request; immutable
    request: dict
    status: str = JOB_QUEUED
    normalised_result: dict | None = None
    error: dict | None = None
    created_at: int = 0
    finished_at: int | None = None
    checksum_failures: int = 0
    datasets_verified: int = 0

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "requested_by": self.requested_by,
            "lab_id": self.lab_id,
            "request_payload": self.request_payload,
            "request": self.request,
            "status": self.status,
            "normalised_result": self.normalised_result,
            "error": self.error,
            "created_at": self.created_at,
            "finished_at": self.finished_at,
            "checksum_failures": self.checksum_failures,
            "datasets_verified": self.datasets_verified,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderJob":
        return cls(
            job_id=data["job_id"],
            kind=data["kind"],
            requested_by=data["requested_by"],
            lab_id=data["lab_id"],
            request_payload=data["request_payload"],
            request=dict(data["request"]),
            status=data["status"],
            normalised_result=data.get("normalised_result"),
            error=data.get("error"),
            created_at=data["created_at"],
            finished_at=data.get("finished_at"),
            checksum_failures=data.get("checksum_failures", 0),
            datasets_verified=data.get("datasets_verified", 0),
        )


# ---------------------------------------------------------------------------
# validation


def validate_literature_query(query: LiteratureQuery, known_sources: frozenset[str]) -> None:
    if not query.research_question.strip():
        raise InvalidQuery("research_question must be non-empty")
    if query.result_limit < 1:
        raise InvalidQuery("result_limit must be at least 1")
    if not query.source_databases:
        raise InvalidQuery("at least one source database is required")
    unknown = set(query.source_databases) - known_sources
    if unknown:
        raise InvalidQuery(f"unknown source databases: {', '.join(sorted(unknown))}")


def validate_analysis_request(request: AnalysisRequest) -> None:
    if not request.task_description.strip():
        raise InvalidRequest("task_description must be non-empty")
    for ref in request.dataset_refs:
        if not ref.uri.strip():
            raise InvalidRequest("dataset uri must be non-empty")
        if not _SHA256_RE.match(ref.sha256):
            raise InvalidRequest(f"malformed sha256 checksum for {ref.uri}")


# ---------------------------------------------------------------------------
# stub backends (deterministic, in-repo fixtures)


def tokenize(text: str) -> list[str]:
    return [
        token
        for token in re.findall(r"[a-z0-9]+", text.lower())
        if len(token) >= 3 and token not in _STOPWORDS
    ]


class StubLiteratureBackend:
    """Keyword search over a fixture corpus of paper metadata.

    A record matches when every query keyword appears in its title, summary,
    or topic list; results are ordered by match density, then identifier,
    which makes replays byte-identical.
    """

    def __init__(self, records: list[dict]):
        self._records = records

    @classmethod
    def from_path(cls, path: Path) -> "StubLiteratureBackend":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    def search(self, query: LiteratureQuery) -> list[dict]:
        keywords = tokenize(query.research_question)
        if not keywords:
            raise BackendError("EMPTY_QUERY", "no searchable keywords in question")
        sources = set(query.source_databases)
        scored: list[tuple[float, str, dict]] = []
        for record in self._records:
            if record["source"] not in sources:
                continue
            haystack = set(
                tokenize(
                    " ".join(
                        [record["title"], record["summary"], " ".join(record.get("topics", []))]
                    )
                )
            )
            if all(keyword in haystack for keyword in keywords):
                density = len(set(keywords)) / max(1, len(haystack))
                scored.append((-density, record["identifier"], record))
        scored.sort(key=lambda item: (item[0], item[1]))
        entries = [
            {
                "title": record["title"],
                "authors": record["authors"],
                "venue": record["venue"],
                "year": record["year"],
                "identifier": record["identifier"],
                "summary": record["summary"],
            }
            for _, _, record in scored[: query.result_limit]
        ]
        return entries


class StubAnalysisBackend:
    """Deterministic summary statistics over local numeric table files."""

    def analyze(
        self, request: AnalysisRequest, datasets: list[tuple[DatasetRef, bytes]]
    ) -> tuple[dict, list[tuple[str, bytes, str]]]:
        stats: dict[str, dict] = {}
        for ref, content in datasets:
            stats[ref.uri] = self._table_stats(ref.uri, content)
        summary_parts = [f"Deterministic summary statistics for {len(datasets)} dataset(s)."]
        for uri in sorted(stats):
            table = stats[uri]
            summary_parts.append(
                f"{uri}: {table['row_count']} rows; "
                + "; ".join(
                    f"{col}: mean={vals['mean']:.6g}, min={vals['min']:.6g}, max={vals['max']:.6g}"
                    for col, vals in sorted(table["columns"].items())
                )
            )
        artifact_bytes = canonical_json(
            {"task_description": request.task_description, "tables": stats}
        ).encode("utf-8")
        artifacts = [("summary_stats.json", artifact_bytes, "application/json")]
        result = {
            "methodology_summary": " ".join(summary_parts),
            "tables": stats,
        }
        return result, artifacts

    @staticmethod
    def _table_stats(uri: str, content: bytes) -> dict:
        try:
            text = content.decode("utf-8")
            rows = list(csv.reader(io.StringIO(text)))
        except (UnicodeDecodeError, csv.Error) as exc:
            raise BackendError("UNPARSEABLE_DATASET", f"{uri}: {exc}") from exc
        if len(rows) < 2:
            raise BackendError("UNPARSEABLE_DATASET", f"{uri}: no data rows")
        header, data_rows = rows[0], rows[1:]
        columns: dict[str, dict] = {}
        for index, name in enumerate(header):
            values = []
            numeric = True
            for row in data_rows:
                if index >= len(row):
                    numeric = False
                    break
                try:
                    values.append(float(row[index]))
                except ValueError:
                    numeric = False
                    break
            if numeric and values:
                columns[name] = {
                    "mean": sum(values) / len(values),
                    "min": min(values),
                    "max": max(values),
                }
        return {"row_count": len(data_rows), "columns": columns}


# ---------------------------------------------------------------------------
# HTTP adapter backends

Transport = Callable[[str, str, dict, dict], dict]
"""(method, url, headers, json_body) -> decoded JSON response."""


class HttpLiteratureBackend:
    """Adapter for a real literature service behind the proxy.

    The credential is attached server-side and never appears in job records
    or results.  The transport is injectable so the adapter is testable
    without network access.
    """

    def __init__(self, base_url: str, credential: str, transport: Transport | None = None):
        self._base_url = base_url.rstrip("/")
        self._credential = credential
        self._transport = transport or _default_transport

    def search(self, query: LiteratureQuery) -> list[dict]:
        response = self._transport(
            "POST",
            f"{self._base_url}/search",
            {"Authorization": f"Bearer {self._credential}"},
            query.to_dict(),
        )
        entries = response.get("entries")
        if not isinstance(entries, list):
            raise BackendError("MALFORMED_RESPONSE", "literature backend returned no entries")
        return entries[: query.result_limit]


class HttpAnalysisBackend:
    def __init__(self, base_url: str, credential: str, transport: Transport | None = None):
        self._base_url = base_url.rstrip("/")
        self._credential = credential
        self._transport = transport or _default_transport

    def analyze(
        self, request: AnalysisRequest, datasets: list[tuple[DatasetRef, bytes]]
    ) -> tuple[dict, list[tuple[str, bytes, str]]]:
        response = self._transport(
            "POST",
            f"{self._base_url}/analyze",
            {"Authorization": f"Bearer {self._credential}"},
            request.to_dict(),
        )
        if "methodology_summary" not in response:
            raise BackendError("MALFORMED_RESPONSE", "analysis backend returned no summary")
        return response, []


def _default_transport(method: str, url: str, headers: dict, body: dict) -> dict:
    import urllib.request

    req = urllib.request.Request(
        url,
        data=canonical_json(body).encode("utf-8"),
        headers={**headers, "Content-Type": "application/json"},
        method=method,
    )
    with urllib.request.urlopen(req, timeout=30) as resp:  # pragma: no cover
        return json.loads(resp.read().decode("utf-8"))


# ---------------------------------------------------------------------------
# operations


def _require_member(svc: "LabService", actor: Principal, lab_id: str) -> str:
    agent_id = require_agent(actor)
    lab = svc.store.lab(lab_id)
    if agent_id not in lab.member_roles:
        raise NotMember(f"{agent_id} is not a member of {lab_id}")
    return agent_id


def submit_literature_job(
    svc: "LabService", actor: Principal, lab_id: str, query: LiteratureQuery
) -> ProviderJob:
    agent_id = _require_member(svc, actor, lab_id)
    validate_literature_query(query, svc.literature_sources())
    return _enqueue(svc, agent_id, lab_id, KIND_LITERATURE, query.to_dict())


def submit_analysis_job(
    svc: "LabService", actor: Principal, lab_id: str, request: AnalysisRequest
) -> ProviderJob:
    agent_id = _require_member(svc, actor, lab_id)
    validate_analysis_request(request)
    return _enqueue(svc, agent_id, lab_id, KIND_ANALYSIS, request.to_dict())


def _enqueue(
    svc: "LabService", agent_id: str, lab_id: str, kind: str, request: dict
) -> ProviderJob:
    job = ProviderJob(
        job_id=svc.ids.next("job"),
        kind=kind,
        requested_by=agent_id,
        lab_id=lab_id,
        request_payload=canonical_json(request),
        request=request,
        created_at=svc.now(),
    )
    svc.store.jobs[job.job_id] = job
    svc.emit(
        "job_submitted",
        agent_id,
        lab_id,
        {
            "job_id": job.job_id,
            "kind": kind,
            "request_payload": job.request_payload,
            "request": request,
        },
    )
    return job


def execute_job(svc: "LabService", job_id: str) -> ProviderJob:
    """Run one queued job to a terminal state; at most once per job.

    Backend failures land in the job's error field; only a job in the
    queued state may start running.
    """
    job = svc.store.job(job_id)
    if job.status != JOB_QUEUED:
        raise IllegalJobState(f"job {job_id} is {job.status}, not queued")
    job.status = JOB_RUNNING
    artifact_blobs: dict[str, str] = {}
    try:
        if job.kind == KIND_LITERATURE:
            query = LiteratureQuery.from_dict(job.request)
            entries = svc.literature_backend().search(query)
            job.normalised_result = {"entries": entries}
        else:
            request = AnalysisRequest.from_dict(job.request)
            datasets = _fetch_datasets(svc, job, request)
            result, artifacts = svc.analysis_backend().analyze(request, datasets)
            stored = []
            for name, content, media_type in artifacts:
                content_hash = sha256_hex(content)
                svc.store.blobs[content_hash] = content
                artifact_blobs[content_hash] = base64.b64encode(content).decode("ascii")
                stored.append(
                    {"name": name, "content_hash": content_hash, "media_type": media_type}
                )
            result = dict(result)
            result["artifacts"] = stored
            job.normalised_result = result
        job.status = JOB_SUCCEEDED
    except BackendError as exc:
        job.status = JOB_FAILED
        job.error = {"code": exc.code, "message": exc.message}
        job.normalised_result = None
    except Exception as exc:  # backend bugs must not crash the service
        job.status = JOB_FAILED
        job.error = {"code": "BACKEND_ERROR", "message": str(exc)}
        job.normalised_result = None
    job.finished_at = svc.now()
    svc.emit(
        "job_finished",
        job.requested_by,
        job.lab_id,
        {
            "job_id": job.job_id,
            "status": job.status,
            "normalised_result": job.normalised_result,
            "error": job.error,
            "checksum_failures": job.checksum_failures,
            "datasets_verified": job.datasets_verified,
            "artifact_blobs": artifact_blobs,
        },
    )
    return job


def _fetch_datasets(
    svc: "LabService", job: ProviderJob, request: AnalysisRequest
) -> list[tuple[DatasetRef, bytes]]:
    datasets = []
    for ref in request.dataset_refs:
        content = svc.resolve_dataset(ref.uri)
        if content is None:
            raise BackendError("DATASET_UNAVAILABLE", f"cannot fetch dataset {ref.uri}")
        recomputed = sha256_hex(content)
        if recomputed != ref.sha256:
            job.checksum_failures += 1
            raise BackendError(
                "CHECKSUM_MISMATCH",
                f"{ref.uri}: declared {ref.sha256}, recomputed {recomputed}",
            )
        job.datasets_verified += 1
        datasets.append((ref, content))
    return datasets


def get_job(svc: "LabService", actor: Principal, job_id: str) -> ProviderJob:
    """Job reads are restricted to members of the owning lab."""
    job = svc.store.job(job_id)
    lab = svc.store.lab(job.lab_id)
    if actor.is_agent:
        if actor.subject_id not in lab.member_roles:
            raise NotMember(f"{actor.subject_id} is not a member of {job.lab_id}")
        return job
    raise NotMember("provider jobs are visible to lab members only")
