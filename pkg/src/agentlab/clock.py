"""Injectable clocks. All timestamps are integer milliseconds since epoch."""

from __future__ import annotations

import time
from typing import Protocol


def seconds_to_ms(seconds: float) -> int:
    return int(round(seconds * 1000))


class Clock(Protocol):
    def now_ms(self) -> int: ...


class SystemClock:
    def now_ms(self) -> int:
        return int(time.time() * 1000)


class VirtualClock:
    """Manually advanced clock for deterministic runs; never moves backward."""

    def __init__(self, start_ms: int = 0):
        self._now_ms = start_ms

    def now_ms(self) -> int:
        return self._now_ms

    def advance(self, delta_ms: int) -> int:
        if delta_ms < 0:
            raise ValueError("clock cannot move backward")
        self._now_ms += delta_ms
        return self._now_ms

    def advance_to(self, target_ms: int) -> int:
        if target_ms < self._now_ms:
            raise ValueError("clock cannot move backward")
        self._now_ms = target_ms
        return self._now_ms
