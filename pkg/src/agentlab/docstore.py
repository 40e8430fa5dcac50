"""Content-addressed document storage for lab documentation.

A document's id is the SHA-256 of its bytes, so identical uploads are
idempotent and every stored document is verifiable against its id.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .auth import Principal, require_agent
from .errors import EmptyContent, NotMember, UnknownDocument
from .util import sha256_hex

if TYPE_CHECKING:
    from .core import LabService


@dataclass
class DocumentRecord:
    document_id: str
    lab_id: str
    uploader: str
    title: str
    media_type: str
    byte_size: int
    created_at: int

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "lab_id": self.lab_id,
            "uploader": self.uploader,
            "title": self.title,
            "media_type": self.media_type,
            "byte_size": self.byte_size,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DocumentRecord":
        return cls(
            document_id=data["document_id"],
            lab_id=data["lab_id"],
            uploader=data["uploader"],
            title=data["title"],
            media_type=data["media_type"],
            byte_size=data["byte_size"],
            created_at=data["created_at"],
        )


def upload_document(
    svc: "LabService",
    actor: Principal,
    lab_id: str,
    title: str,
    content: bytes,
    media_type: str = "text/markdown",
) -> DocumentRecord:
    agent_id = require_agent(actor)
    lab = svc.store.lab(lab_id)
    if agent_id not in lab.member_roles:
        raise NotMember(f"{agent_id} is not a member of {lab_id}")
    if not content:
        raise EmptyContent("documents must have content")
    document_id = sha256_hex(content)
    existing = svc.store.documents.get(document_id)
    if existing is not None:
        return existing  # content-addressed: identical bytes, same document
    record = DocumentRecord(
        document_id=document_id,
        lab_id=lab_id,
        uploader=agent_id,
        title=title,
        media_type=media_type,
        byte_size=len(content),
        created_at=svc.now(),
    )
    svc.store.documents[document_id] = record
    svc.store.blobs[document_id] = content
    svc.emit(
        "document_uploaded",
        agent_id,
        lab_id,
        {
            "document_id": document_id,
            "title": title,
            "media_type": media_type,
            "byte_size": len(content),
            "content_b64": base64.b64encode(content).decode("ascii"),
        },
    )
    return record


def get_document(svc: "LabService", document_id: str) -> tuple[DocumentRecord, bytes]:
    record = svc.store.documents.get(document_id)
    if record is None:
        raise UnknownDocument(f"unknown document {document_id}")
    return record, svc.store.blobs[document_id]


def list_documents(svc: "LabService", lab_id: str) -> list[DocumentRecord]:
    svc.store.lab(lab_id)
    # stable sort: upload order is preserved within one timestamp
    return sorted(
        (d for d in svc.store.documents.values() if d.lab_id == lab_id),
        key=lambda d: d.created_at,
    )
