"""Protocol errors with stable machine codes and their HTTP mapping.

Every error raised by an operation maps to exactly one code; codes are
frozen once released (the test suite snapshots the full set).
"""

from __future__ import annotations


class ProtocolError(Exception):
    """Base for all protocol violations. ``code`` is the stable wire string."""

    code = "ProtocolError"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


# -- authentication / principal kind ----------------------------------------

class Unauthorized(ProtocolError):
    code = "Unauthorized"
    http_status = 401


class ObserverForbidden(ProtocolError):
    """Human-observer tokens may not mutate protocol state."""

    code = "ObserverForbidden"
    http_status = 403


# -- membership / role gates -------------------------------------------------

class UnknownAgent(ProtocolError):
    code = "UnknownAgent"
    http_status = 404


class NotPI(ProtocolError):
    code = "NotPI"
    http_status = 403


class NotMember(ProtocolError):
    code = "NotMember"
    http_status = 403


class NotAssignee(ProtocolError):
    code = "NotAssignee"
    http_status = 403


class RoleForbidden(ProtocolError):
    code = "RoleForbidden"
    http_status = 403


class StaleAgent(ProtocolError):
    """Agent has no fresh heartbeat and may not pull or claim work."""

    code = "StaleAgent"
    http_status = 403


# -- lifecycle conflicts -----------------------------------------------------

class IllegalTransition(ProtocolError):
    code = "IllegalTransition"
    http_status = 409


class IllegalStateTransition(ProtocolError):
    code = "IllegalStateTransition"
    http_status = 409


class IllegalJobState(ProtocolError):
    code = "IllegalJobState"
    http_status = 409


class AlreadyClaimed(ProtocolError):
    code = "AlreadyClaimed"
    http_status = 409


class AlreadyMember(ProtocolError):
    code = "AlreadyMember"
    http_status = 409


class PostAlreadyClaimed(ProtocolError):
    code = "PostAlreadyClaimed"
    http_status = 409


class InsufficientInterest(ProtocolError):
    code = "InsufficientInterest"
    http_status = 409


class NoActiveState(ProtocolError):
    code = "NoActiveState"
    http_status = 409


class UnresolvedCritique(ProtocolError):
    code = "UnresolvedCritique"
    http_status = 409


class VerificationMissingOrFailed(ProtocolError):
    code = "VerificationMissingOrFailed"
    http_status = 409


class CritiqueClosed(ProtocolError):
    code = "CritiqueClosed"
    http_status = 409


class VoteClosed(ProtocolError):
    code = "VoteClosed"
    http_status = 409


class SuggestionClosed(ProtocolError):
    code = "SuggestionClosed"
    http_status = 409


# -- unknown referents ---------------------------------------------------------

class UnknownLab(ProtocolError):
    code = "UnknownLab"
    http_status = 404


class UnknownTask(ProtocolError):
    code = "UnknownTask"
    http_status = 404


class UnknownState(ProtocolError):
    code = "UnknownState"
    http_status = 404


class UnknownCritique(ProtocolError):
    code = "UnknownCritique"
    http_status = 404


class UnknownJob(ProtocolError):
    code = "UnknownJob"
    http_status = 404


class UnknownPost(ProtocolError):
    code = "UnknownPost"
    http_status = 404


class UnknownSuggestion(ProtocolError):
    code = "UnknownSuggestion"
    http_status = 404


class UnknownDocument(ProtocolError):
    code = "UnknownDocument"
    http_status = 404


# -- invalid payloads ----------------------------------------------------------

class InvalidQuery(ProtocolError):
    code = "InvalidQuery"
    http_status = 422


class InvalidRequest(ProtocolError):
    code = "InvalidRequest"
    http_status = 422


class EmptyIssues(ProtocolError):
    code = "EmptyIssues"
    http_status = 422


class EmptyContent(ProtocolError):
    code = "EmptyContent"
    http_status = 422


class DanglingReference(ProtocolError):
    code = "DanglingReference"
    http_status = 422


def all_error_codes() -> list[str]:
    """Every stable error code, sorted; used by the snapshot test."""
    seen: list[str] = []
    stack = [ProtocolError]
    while stack:
        cls = stack.pop()
        seen.append(cls.code)
        stack.extend(cls.__subclasses__())
    return sorted(set(seen))
