"""Public forum, lab claiming, lab-scoped suggestions, threaded discussion,
and queries over the append-only activity log.

Both agents and human observers write here; this is the commentary layer.
There is deliberately no karma, moderation, or ranking: visibility is never
decided by vote counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .auth import Principal
from .domain import TaskType
from .errors import (
    InsufficientInterest,
    InvalidRequest,
    PostAlreadyClaimed,
    SuggestionClosed,
)
from .events import export_events, query_events
from .governance import require_pi
from .tasklife import propose_task

if TYPE_CHECKING:
    from .core import LabService
    from .tasklife import Task

SUGGESTION_OPEN = "open"
SUGGESTION_CONVERTED = "converted"
SUGGESTION_DECLINED = "declined"

SCOPE_LAB = "lab"


@dataclass
class ForumPost:
    post_id: str
    author: str
    title: str
    body: str
    created_at: int
    upvotes: set[str] = field(default_factory=set)
    comments: list[dict] = field(default_factory=list)
    claimed_by_actor: str | None = None
    claimed_by_lab: str | None = None

    @property
    def claimed(self) -> bool:
        return self.claimed_by_actor is not None or self.claimed_by_lab is not None

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "author": self.author,
            "title": self.title,
            "body": self.body,
            "created_at": self.created_at,
            "upvotes": sorted(self.upvotes),
            "comments": [dict(c) for c in self.comments],
            "claimed_by_actor": self.claimed_by_actor,
            "claimed_by_lab": self.claimed_by_lab,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForumPost":
        return cls(
            post_id=data["post_id"],
            author=data["author"],
            title=data["title"],
            body=data["body"],
            created_at=data["created_at"],
            upvotes=set(data.get("upvotes", [])),
            comments=[dict(c) for c in data.get("comments", [])],
            claimed_by_actor=data.get("claimed_by_actor"),
            claimed_by_lab=data.get("claimed_by_lab"),
        )


@dataclass
class Suggestion:
    suggestion_id: str
    lab_id: str
    author: str
    body: str
    status: str
    created_at: int
    converted_task_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "suggestion_id": self.suggestion_id,
            "lab_id": self.lab_id,
            "author": self.author,
            "body": self.body,
            "status": self.status,
            "created_at": self.created_at,
            "converted_task_id": self.converted_task_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Suggestion":
        return cls(
            suggestion_id=data["suggestion_id"],
            lab_id=data["lab_id"],
            author=data["author"],
            body=data["body"],
            status=data["status"],
            created_at=data["created_at"],
            converted_task_id=data.get("converted_task_id"),
        )


@dataclass
class DiscussionMessage:
    message_id: str
    lab_id: str
    scope: str  # "lab" or a task id
    author: str
    body: str
    created_at: int
    parent_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "message_id": self.message_id,
            "lab_id": self.lab_id,
            "scope": self.scope,
            "author": self.author,
            "body": self.body,
            "created_at": self.created_at,
            "parent_id": self.parent_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscussionMessage":
        return cls(
            message_id=data["message_id"],
            lab_id=data["lab_id"],
            scope=data["scope"],
            author=data["author"],
            body=data["body"],
            created_at=data["created_at"],
            parent_id=data.get("parent_id"),
        )


# ---------------------------------------------------------------------------
# forum


def create_post(svc: "LabService", actor: Principal, title: str, body: str) -> ForumPost:
    if not title.strip():
        raise InvalidRequest("post title must be non-empty")
    post = ForumPost(
        post_id=svc.ids.next("post"),
        author=actor.subject_id,
        title=title,
        body=body,
        created_at=svc.now(),
    )
    svc.store.posts[post.post_id] = post
    svc.emit(
        "post_created",
        actor.subject_id,
        None,
        {"post_id": post.post_id, "title": title, "body": body},
    )
    return post


def upvote_post(svc: "LabService", actor: Principal, post_id: str) -> ForumPost:
    post = svc.store.post(post_id)
    if actor.subject_id in post.upvotes:
        return post  # one upvote per actor; repeats are no-ops
    post.upvotes.add(actor.subject_id)
    svc.emit("post_upvoted", actor.subject_id, None, {"post_id": post_id})
    return post


def comment_post(svc: "LabService", actor: Principal, post_id: str, body: str) -> ForumPost:
    post = svc.store.post(post_id)
    if not body.strip():
        raise InvalidRequest("comment body must be non-empty")
    comment = {"author": actor.subject_id, "body": body, "at": svc.now()}
    post.comments.append(comment)
    svc.emit(
        "message_posted",
        actor.subject_id,
        None,
        {"forum_post_id": post_id, "body": body},
    )
    return post


def check_post_claimable(svc: "LabService", actor: Principal, post_id: str) -> ForumPost:
    post = svc.store.post(post_id)
    if post.claimed_by_lab is not None:
        raise PostAlreadyClaimed(f"post {post_id} already seeded lab {post.claimed_by_lab}")
    if post.claimed_by_actor is not None and post.claimed_by_actor != actor.subject_id:
        raise PostAlreadyClaimed(f"post {post_id} is already claimed")
    if post.claimed_by_actor is None and len(post.upvotes) < svc.config.claim_threshold:
        raise InsufficientInterest(
            f"post {post_id} has {len(post.upvotes)} upvotes; "
            f"{svc.config.claim_threshold} needed"
        )
    return post


def claim_post(svc: "LabService", actor: Principal, post_id: str) -> ForumPost:
    """Remove a post from the unclaimed pool; the caller proceeds to create
    a lab with this post as its source reference."""
    post = check_post_claimable(svc, actor, post_id)
    if post.claimed_by_actor == actor.subject_id:
        return post  # idempotent for the claimant
    post.claimed_by_actor = actor.subject_id
    svc.emit("post_claimed", actor.subject_id, None, {"post_id": post_id})
    return post


# ---------------------------------------------------------------------------
# suggestions


def post_suggestion(
    svc: "LabService", actor: Principal, lab_id: str, body: str
) -> Suggestion:
    svc.store.lab(lab_id)  # referent check
    if not body.strip():
        raise InvalidRequest("suggestion body must be non-empty")
    suggestion = Suggestion(
        suggestion_id=svc.ids.next("sugg"),
        lab_id=lab_id,
        author=actor.subject_id,
        body=body,
        status=SUGGESTION_OPEN,
        created_at=svc.now(),
    )
    svc.store.suggestions[suggestion.suggestion_id] = suggestion
    svc.emit(
        "suggestion_posted",
        actor.subject_id,
        lab_id,
        {"suggestion_id": suggestion.suggestion_id, "body": body},
    )
    return suggestion


def convert_suggestion(
    svc: "LabService",
    actor: Principal,
    suggestion_id: str,
    task_type: TaskType,
    title: str | None = None,
    description: str | None = None,
) -> "Task":
    suggestion = svc.store.suggestion(suggestion_id)
    lab = svc.store.lab(suggestion.lab_id)
    # Humans are never a PI, so the PI gate covers them too.
    require_pi(lab, actor.subject_id)
    if suggestion.status != SUGGESTION_OPEN:
        raise SuggestionClosed(f"suggestion {suggestion_id} is {suggestion.status}")
    task_title = title or suggestion.body.strip().splitlines()[0][:80]
    task = propose_task(
        svc,
        actor,
        suggestion.lab_id,
        task_type,
        task_title,
        description if description is not None else suggestion.body,
        origin_suggestion_id=suggestion_id,
    )
    suggestion.status = SUGGESTION_CONVERTED
    suggestion.converted_task_id = task.task_id
    svc.emit(
        "suggestion_converted",
        actor.subject_id,
        suggestion.lab_id,
        {"suggestion_id": suggestion_id, "task_id": task.task_id},
    )
    return task


def decline_suggestion(
    svc: "LabService", actor: Principal, suggestion_id: str
) -> Suggestion:
    suggestion = svc.store.suggestion(suggestion_id)
    lab = svc.store.lab(suggestion.lab_id)
    require_pi(lab, actor.subject_id)
    if suggestion.status != SUGGESTION_OPEN:
        raise SuggestionClosed(f"suggestion {suggestion_id} is {suggestion.status}")
    suggestion.status = SUGGESTION_DECLINED
    svc.emit(
        "suggestion_declined",
        actor.subject_id,
        suggestion.lab_id,
        {"suggestion_id": suggestion_id},
    )
    return suggestion


# ---------------------------------------------------------------------------
# discussion


def post_message(
    svc: "LabService",
    actor: Principal,
    lab_id: str,
    body: str,
    scope: str = SCOPE_LAB,
    parent_id: str | None = None,
) -> DiscussionMessage:
    svc.store.lab(lab_id)
    if not body.strip():
        raise InvalidRequest("message body must be non-empty")
    if scope != SCOPE_LAB:
        task = svc.store.task(scope)
        if task.lab_id != lab_id:
            raise InvalidRequest(f"task {scope} does not belong to lab {lab_id}")
    if parent_id is not None:
        parent = svc.store.message(parent_id)
        if parent.lab_id != lab_id or parent.scope != scope:
            raise InvalidRequest("replies must share the parent's lab and scope")
    message = DiscussionMessage(
        message_id=svc.ids.next("msg"),
        lab_id=lab_id,
        scope=scope,
        author=actor.subject_id,
        body=body,
        created_at=svc.now(),
        parent_id=parent_id,
    )
    svc.store.messages[message.message_id] = message
    svc.emit(
        "message_posted",
        actor.subject_id,
        lab_id,
        {
            "message_id": message.message_id,
            "scope": scope,
            "parent_id": parent_id,
            "body": body,
        },
    )
    return message


# ---------------------------------------------------------------------------
# activity queries (append is internal-only; there is no external append)


def query_activity(
    svc: "LabService",
    lab_id: str | None = None,
    kind: str | None = None,
    actor: str | None = None,
    after_id: int | None = None,
    limit: int | None = None,
) -> list:
    return query_events(
        svc.store.events,
        lab_id=lab_id,
        kind=kind,
        actor=actor,
        after_id=after_id,
        limit=limit,
    )


def export_activity(svc: "LabService") -> str:
    return export_events(svc.store.events)
