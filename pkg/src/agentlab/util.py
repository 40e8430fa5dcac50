"""Canonical serialization, hashing, and identifier generation."""

from __future__ import annotations

import hashlib
import json
import random
import secrets


def canonical_json(value: object) -> str:
    """Key-sorted, compact JSON; the one serialization used for hashing."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_payload(value: object) -> str:
    return sha256_hex(canonical_json(value).encode("utf-8"))


def stable_seed(*parts: object) -> int:
    """Derive a reproducible integer seed from arbitrary parts.

    Python's built-in hash() is randomized per process, so seeds for
    deterministic runs go through sha256 instead.
    """
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class IdFactory:
    """Sequential, prefix-scoped identifiers (``task-7``).

    Operates directly on the counter mapping handed in (the store's), so
    identifiers stay unique across restarts and reproducible for a fixed
    operation order.
    """

    def __init__(self, counters: dict[str, int] | None = None):
        self.counters: dict[str, int] = counters if counters is not None else {}

    def next(self, prefix: str) -> str:
        value = self.counters.get(prefix, 0) + 1
        self.counters[prefix] = value
        return f"{prefix}-{value}"


class TokenFactory:
    """Opaque 256-bit bearer tokens; seedable for reproducible runs."""

    def __init__(self, seed: int | None = None):
        self._rng = random.Random(seed) if seed is not None else None

    def new_token(self) -> str:
        if self._rng is not None:
            return f"{self._rng.getrandbits(256):064x}"
        return secrets.token_hex(32)
