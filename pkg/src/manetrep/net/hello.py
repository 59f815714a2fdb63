"""HELLO beacons and the per-receiver archives queried during investigations."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field


@dataclass(frozen=True)
class HelloRecord:
    sender: int
    position: tuple[float, float]
    timestamp: float
    radio_range: float
    hello_interval: float
    sender_neighbors: tuple[int, ...] = ()
    sender_uplinks: tuple[int, ...] = ()


def hello_times(first: float, interval: float, horizon: float) -> list[float]:
    """Emission instants ``first + k*interval`` up to and including ``horizon``."""
    out = []
    k = 0
    while True:
        t = first + k * interval
        if t > horizon + 1e-9:
            return out
        out.append(t)
        k += 1


@dataclass
class HelloArchive:
    """Append-only store of HELLOs heard by one node, indexed by sender."""

    owner: int
    _by_sender: dict[int, list[HelloRecord]] = field(default_factory=dict)
    _times: dict[int, list[float]] = field(default_factory=dict)

    def append(self, record: HelloRecord) -> None:
        times = self._times.setdefault(record.sender, [])
        if times and record.timestamp < times[-1]:
            raise ValueError("HELLO archive is append-only in time order")
        times.append(record.timestamp)
        self._by_sender.setdefault(record.sender, []).append(record)

    def query(self, sender: int, t_lo: float, t_hi: float) -> list[HelloRecord]:
        """Records from ``sender`` with ``t_lo <= timestamp < t_hi``."""
        times = self._times.get(sender)
        if not times:
            return []
        lo = bisect.bisect_left(times, t_lo)
        hi = bisect.bisect_left(times, t_hi)
        return list(self._by_sender[sender][lo:hi])

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_sender.values())
