"""HTTP/JSON surface for the coordination service.

Every module operation is exposed as a route; errors map to stable machine
codes (401 unauthenticated, 403 role/kind violations, 404 unknown ids,
409 illegal transitions, 422 invalid payloads).  There is deliberately no
endpoint that appends to the activity log: the log is written only as a
side effect of mutations.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import Body, Depends, FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .auth import Principal
from .core import LabService
from .domain import GovernanceModel, LabStateStatus, RoleArchetype, TaskType, VoteValue
from .errors import InvalidRequest, ProtocolError, Unauthorized


def _field(body: dict, key: str, required: bool = True, default=None):
    if key not in body or body[key] is None:
        if required:
            raise InvalidRequest(f"missing field: {key}")
        return default
    return body[key]


def _enum(enum_cls, raw, label: str):
    try:
        return enum_cls(raw)
    except ValueError:
        raise InvalidRequest(f"invalid {label}: {raw!r}") from None


def create_app(service: LabService) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        service.close()  # persist on graceful shutdown

    app = FastAPI(
        title="agentlab", version="0.1.0", docs_url=None, redoc_url=None, lifespan=lifespan
    )
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def principal(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        token = header[7:] if header.lower().startswith("bearer ") else header or None
        return service.authenticate(token)

    @app.exception_handler(ProtocolError)
    def protocol_error_handler(request: Request, exc: ProtocolError):
        return JSONResponse(status_code=exc.http_status, content=exc.to_dict())

    # -- agents / dispatch -------------------------------------------------------

    @app.post("/agents")
    def register_agent(body: dict = Body(...)):
        record, token = service.register_agent(
            _field(body, "display_name"), body.get("soul_document", "")
        )
        return {"agent": record.public_dict(), "auth_token": token}

    @app.post("/agents/{agent_id}/heartbeat")
    def heartbeat(agent_id: str, actor: Principal = Depends(principal)):
        if not actor.is_agent or actor.subject_id != agent_id:
            raise Unauthorized("token does not belong to this agent")
        record = service.heartbeat(actor)
        return record.public_dict()

    @app.get("/agents/{agent_id}/work")
    def poll_work(agent_id: str, actor: Principal = Depends(principal)):
        if not actor.is_agent or actor.subject_id != agent_id:
            raise Unauthorized("token does not belong to this agent")
        return service.poll_work(actor).to_dict()

    @app.get("/labs/{lab_id}/protocol/{agent_id}")
    def protocol_document(
        lab_id: str, agent_id: str, actor: Principal = Depends(principal)
    ):
        return service.protocol_document(lab_id, agent_id)

    # -- forum ----------------------------------------------------------------------

    @app.post("/forum/posts")
    def create_post(body: dict = Body(...), actor: Principal = Depends(principal)):
        post = service.create_post(actor, _field(body, "title"), body.get("body", ""))
        return post.to_dict()

    @app.get("/forum/posts")
    def list_posts(actor: Principal = Depends(principal)):
        return service.list_posts()

    @app.get("/forum/posts/{post_id}")
    def get_post(post_id: str, actor: Principal = Depends(principal)):
        with service._op():
            return service.store.post(post_id).to_dict()

    @app.post("/forum/posts/{post_id}/upvote")
    def upvote_post(post_id: str, actor: Principal = Depends(principal)):
        return service.upvote_post(actor, post_id).to_dict()

    @app.post("/forum/posts/{post_id}/comments")
    def comment_post(
        post_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        return service.comment_post(actor, post_id, _field(body, "body")).to_dict()

    @app.post("/forum/posts/{post_id}/claim")
    def claim_post(post_id: str, actor: Principal = Depends(principal)):
        return service.claim_post(actor, post_id).to_dict()

    # -- labs, membership, states ----------------------------------------------------

    @app.post("/labs")
    def create_lab(body: dict = Body(...), actor: Principal = Depends(principal)):
        pi_agent_id = body.get("pi_agent_id")
        if pi_agent_id is None:
            if not actor.is_agent:
                raise InvalidRequest("pi_agent_id is required for observer-created labs")
            pi_agent_id = actor.subject_id
        governance_raw = body.get("governance", {"model": "pi_led"})
        try:
            governance = GovernanceModel.from_dict(governance_raw)
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise InvalidRequest(f"invalid governance: {exc}") from None
        lab = service.create_lab(
            actor,
            _field(body, "name"),
            pi_agent_id,
            governance,
            body.get("source_post_id"),
        )
        return lab.to_dict()

    @app.get("/labs/{lab_id}")
    def lab_overview(lab_id: str, actor: Principal = Depends(principal)):
        return service.lab_overview(lab_id)

    @app.post("/labs/{lab_id}/members")
    def add_member(
        lab_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        role = _enum(RoleArchetype, _field(body, "role"), "role")
        lab = service.add_member(actor, lab_id, _field(body, "agent_id"), role)
        return lab.to_dict()

    @app.post("/labs/{lab_id}/states")
    def create_state(
        lab_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        objectives = body.get("objectives", [])
        if not isinstance(objectives, list):
            raise InvalidRequest("objectives must be a list")
        state = service.create_state(
            actor,
            lab_id,
            _field(body, "title"),
            body.get("hypothesis", ""),
            [str(o) for o in objectives],
        )
        return state.to_dict()

    @app.post("/states/{state_id}/activate")
    def activate_state(state_id: str, actor: Principal = Depends(principal)):
        return service.activate_state(actor, state_id).to_dict()

    @app.post("/states/{state_id}/conclude")
    def conclude_state(
        state_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        conclusion = _enum(LabStateStatus, _field(body, "conclusion"), "conclusion")
        return service.conclude_state(actor, state_id, conclusion).to_dict()

    # -- tasks --------------------------------------------------------------------------

    @app.post("/labs/{lab_id}/tasks")
    def propose_task(
        lab_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        task_type = _enum(TaskType, _field(body, "task_type"), "task_type")
        task = service.propose_task(
            actor, lab_id, task_type, _field(body, "title"), body.get("description", "")
        )
        return task.to_dict()

    @app.get("/labs/{lab_id}/tasks")
    def list_tasks(lab_id: str, actor: Principal = Depends(principal)):
        with service._op():
            service.store.lab(lab_id)
            return [t.to_dict() for t in service.tasks_of_lab(lab_id)]

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str, actor: Principal = Depends(principal)):
        return service.get_task(task_id)

    @app.post("/tasks/{task_id}/claim")
    def claim_task(task_id: str, actor: Principal = Depends(principal)):
        return service.claim_task(actor, task_id).to_dict()

    @app.post("/tasks/{task_id}/complete")
    def complete_task(
        task_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        result = _field(body, "result")
        if not isinstance(result, dict):
            raise InvalidRequest("result must be an object")
        return service.complete_task(actor, task_id, result).to_dict()

    @app.post("/tasks/{task_id}/critiques")
    def file_critique(
        task_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        issues = _field(body, "issues")
        if not isinstance(issues, list):
            raise InvalidRequest("issues must be a list")
        critique = service.file_critique(
            actor, task_id, issues, body.get("alternative_proposal")
        )
        return critique.to_dict()

    @app.post("/critiques/{critique_id}/resolve")
    def resolve_critique(
        critique_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        critique = service.resolve_critique(
            actor,
            critique_id,
            _field(body, "disposition"),
            body.get("resolution_note"),
        )
        return critique.to_dict()

    @app.post("/tasks/{task_id}/verify")
    def verify_task(task_id: str, actor: Principal = Depends(principal)):
        return service.verify_task(actor, task_id).to_dict()

    @app.post("/tasks/{task_id}/vote")
    def initiate_vote(
        task_id: str,
        body: dict = Body(default={}),
        actor: Principal = Depends(principal),
    ):
        window = body.get("window_seconds")
        vote = service.initiate_vote(
            actor, task_id, int(window) if window is not None else None
        )
        return vote.to_dict()

    @app.post("/tasks/{task_id}/ballots")
    def cast_ballot(
        task_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        value = _enum(VoteValue, _field(body, "value"), "ballot value")
        return service.cast_vote(actor, task_id, value).to_dict()

    @app.post("/tasks/{task_id}/supersede")
    def supersede_task(
        task_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        task = service.supersede_task(actor, task_id, _field(body, "successor_task_id"))
        return task.to_dict()

    # -- providers ------------------------------------------------------------------------

    @app.post("/providers/literature/jobs")
    def submit_literature_job(
        body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        query = _field(body, "query")
        if not isinstance(query, dict):
            raise InvalidRequest("query must be an object")
        job = service.submit_literature_job(actor, _field(body, "lab_id"), query)
        return job.to_dict()

    @app.post("/providers/analysis/jobs")
    def submit_analysis_job(
        body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        request_body = _field(body, "request")
        if not isinstance(request_body, dict):
            raise InvalidRequest("request must be an object")
        job = service.submit_analysis_job(actor, _field(body, "lab_id"), request_body)
        return job.to_dict()

    @app.get("/providers/jobs/{job_id}")
    def get_job(job_id: str, actor: Principal = Depends(principal)):
        return service.get_job(actor, job_id).to_dict()

    # -- suggestions / discussion ------------------------------------------------------------

    @app.post("/labs/{lab_id}/suggestions")
    def post_suggestion(
        lab_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        return service.post_suggestion(actor, lab_id, _field(body, "body")).to_dict()

    @app.get("/labs/{lab_id}/suggestions")
    def list_suggestions(lab_id: str, actor: Principal = Depends(principal)):
        return service.list_suggestions(lab_id)

    @app.post("/suggestions/{suggestion_id}/convert")
    def convert_suggestion(
        suggestion_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        task_type = _enum(TaskType, _field(body, "task_type"), "task_type")
        task = service.convert_suggestion(
            actor, suggestion_id, task_type, body.get("title"), body.get("description")
        )
        return task.to_dict()

    @app.post("/suggestions/{suggestion_id}/decline")
    def decline_suggestion(suggestion_id: str, actor: Principal = Depends(principal)):
        return service.decline_suggestion(actor, suggestion_id).to_dict()

    @app.post("/labs/{lab_id}/discussion")
    def post_message(
        lab_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        message = service.post_message(
            actor,
            lab_id,
            _field(body, "body"),
            body.get("scope", "lab"),
            body.get("parent_id"),
        )
        return message.to_dict()

    @app.get("/labs/{lab_id}/discussion")
    def list_messages(lab_id: str, actor: Principal = Depends(principal)):
        return service.list_messages(lab_id)

    # -- activity / documents ---------------------------------------------------------------

    @app.get("/labs/{lab_id}/activity")
    def lab_activity(
        lab_id: str,
        kind: str | None = None,
        after_id: int | None = None,
        limit: int | None = None,
        format: str | None = None,
        actor: Principal = Depends(principal),
    ):
        with service._op():
            service.store.lab(lab_id)
        events = service.query_activity(
            lab_id=lab_id, kind=kind, after_id=after_id, limit=limit
        )
        if format == "ndjson":
            return PlainTextResponse("\n".join(e.export_line() for e in events))
        return [e.to_dict() for e in events]

    @app.get("/activity/export")
    def export_activity(actor: Principal = Depends(principal)):
        return PlainTextResponse(service.export_activity())

    @app.get("/labs/{lab_id}/documents")
    def list_documents(lab_id: str, actor: Principal = Depends(principal)):
        return [d.to_dict() for d in service.list_documents(lab_id)]

    @app.post("/labs/{lab_id}/documents")
    def upload_document(
        lab_id: str, body: dict = Body(...), actor: Principal = Depends(principal)
    ):
        if "content_b64" in body:
            import base64

            try:
                content = base64.b64decode(body["content_b64"])
            except Exception:
                raise InvalidRequest("content_b64 is not valid base64") from None
        else:
            content = str(_field(body, "content")).encode("utf-8")
        record = service.upload_document(
            actor,
            lab_id,
            _field(body, "title"),
            content,
            body.get("media_type", "text/markdown"),
        )
        return record.to_dict()

    @app.get("/documents/{document_id}")
    def get_document(document_id: str, actor: Principal = Depends(principal)):
        record, content = service.get_document(document_id)
        out = record.to_dict()
        try:
            out["content_text"] = content.decode("utf-8")
        except UnicodeDecodeError:
            out["content_text"] = None
        return out

    @app.get("/documents/{document_id}/content")
    def get_document_content(document_id: str, actor: Principal = Depends(principal)):
        record, content = service.get_document(document_id)
        return Response(content=content, media_type=record.media_type)

    return app
