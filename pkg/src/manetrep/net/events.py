"""Time-ordered event schedule."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any


class ScheduleError(RuntimeError):
    pass


@dataclass(order=True)
class SimEvent:
    time: float
    sequence: int
    kind: str = field(compare=False)
    src: int = field(default=-1, compare=False)
    dst: int = field(default=-1, compare=False)
    payload: Any = field(default=None, compare=False)


class EventQueue:
    """Min-heap keyed by ``(time, sequence)``.

    Scheduling into the past relative to the last popped event is refused, so
    the simulated clock never runs backwards.
    """

    def __init__(self) -> None:
        self._heap: list[SimEvent] = []
        self._seq = itertools.count()
        self.now = 0.0
        self.processed = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time: float, kind: str, src: int = -1, dst: int = -1, payload: Any = None) -> SimEvent:
        if time < self.now:
            raise ScheduleError(f"cannot schedule {kind} at {time} before now={self.now}")
        ev = SimEvent(time, next(self._seq), kind, src, dst, payload)
        heapq.heappush(self._heap, ev)
        return ev

    def peek_time(self) -> float | None:
        return self._heap[0].time if self._heap else None

    def pop(self) -> SimEvent:
        ev = heapq.heappop(self._heap)
        self.now = ev.time
        self.processed += 1
        return ev
