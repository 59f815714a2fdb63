"""Observer-local reputation bookkeeping.

Each node owns one :class:`ReputationLedger` describing how it sees every
peer it has interacted with.  Scores live in ``[-phi, +phi]`` where ``phi``
is the node count of the network.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class ReputationError(ValueError):
    pass


class RepEvent(enum.Enum):
    ACK_CONFIRMED_FORWARD = "ack_confirmed_forward"  # +alpha
    GENERATOR_DEBIT = "generator_debit"  # -alpha^2
    DETECTION_REWARD = "detection_reward"  # +alpha^2
    SUPPORTIVE_SET = "supportive_set"  # set alpha*phi, clamped
    SET_MAX = "set_max"  # set +phi
    SET_MIN = "set_min"  # set -phi, local blacklist
    SET_SCORE = "set_score"  # explicit value (penalty controller output)
    LOCAL_BLACKLIST = "local_blacklist"
    NETWORK_BLACKLIST = "network_blacklist"


@dataclass(frozen=True)
class RewardSchedule:
    alpha: float
    phi_size: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise ReputationError(f"alpha must exceed 1, got {self.alpha}")
        if self.phi_size <= 3:
            raise ReputationError(f"phi_size must exceed 3, got {self.phi_size}")

    @property
    def bound(self) -> float:
        return float(self.phi_size)


@dataclass
class ReputationLedger:
    """Everything one observer knows about its peers."""

    observer: int
    phi_size: int
    scores: dict[int, float] = field(default_factory=dict)
    local_blacklist: set[int] = field(default_factory=set)
    network_blacklist: set[int] = field(default_factory=set)
    link_break_count: dict[int, int] = field(default_factory=dict)
    delay_count: dict[int, int] = field(default_factory=dict)
    alt_path_failures: dict[int, int] = field(default_factory=dict)
    comm_history: set[int] = field(default_factory=set)
    traffic_generated: dict[int, int] = field(default_factory=dict)
    traffic_forwarded: dict[int, int] = field(default_factory=dict)
    r_min: float = 0.0
    r_max: float = 0.0

    @property
    def bound(self) -> float:
        return float(self.phi_size)

    def score(self, subject: int) -> float:
        return self.scores.get(subject, 0.0)

    def is_blacklisted(self, subject: int) -> bool:
        return subject in self.local_blacklist

    def _refresh_extremes(self) -> None:
        if not self.comm_history:
            self.r_min = self.r_max = 0.0
            return
        values = [self.scores[s] for s in self.comm_history]
        self.r_min = min(values)
        self.r_max = max(values)


def init_peer(ledger: ReputationLedger, subject: int) -> ReputationLedger:
    """First contact with ``subject``: zero score and counters.  Idempotent."""
    if subject in ledger.comm_history:
        return ledger
    ledger.comm_history.add(subject)
    ledger.scores[subject] = 0.0
    ledger.link_break_count[subject] = 0
    ledger.delay_count[subject] = 0
    ledger.alt_path_failures[subject] = 0
    ledger.traffic_generated.setdefault(subject, 0)
    ledger.traffic_forwarded.setdefault(subject, 0)
    if len(ledger.comm_history) == 1:
        ledger.r_min = ledger.r_max = 0.0
    else:
        ledger.r_min = min(ledger.r_min, 0.0)
        ledger.r_max = max(ledger.r_max, 0.0)
    return ledger


def comparative_reputation(ledger: ReputationLedger, subject: int) -> float:
    """Position of ``subject``'s score inside the observer's observed range."""
    if subject not in ledger.comm_history:
        raise ReputationError(f"node {subject} not in communication history of {ledger.observer}")
    r_min, r_max = ledger.r_min, ledger.r_max
    if r_max < r_min:
        raise ReputationError("r_max below r_min")
    return (ledger.scores[subject] - r_min) / (r_max - r_min + 1.0)


def expectation(forwarded: int, generated: int) -> float:
    if forwarded < 0 or generated < 0:
        raise ReputationError("traffic counts must be non-negative")
    if forwarded > generated:
        raise ReputationError(f"forwarded exceeds generated ({forwarded} > {generated})")
    return forwarded / (generated + 1.0)


def apply_reputation_event(
    ledger: ReputationLedger,
    subject: int,
    event: RepEvent,
    alpha: float = 2.0,
    value: float | None = None,
) -> float:
    """Apply ``event`` to ``subject`` and return the signed score change.

    Updates saturate at ``+-phi``.  A delta that would take the score below
    ``-phi`` puts the subject on the local blacklist.  Network blacklisting is
    absorbing.
    """
    init_peer(ledger, subject)
    bound = ledger.bound
    old = ledger.scores[subject]

    if subject in ledger.network_blacklist:
        return 0.0

    if event is RepEvent.NETWORK_BLACKLIST:
        ledger.network_blacklist.add(subject)
        ledger.local_blacklist.add(subject)
        new = -bound
    elif event is RepEvent.LOCAL_BLACKLIST:
        ledger.local_blacklist.add(subject)
        new = old
    elif event is RepEvent.SET_MIN:
        ledger.local_blacklist.add(subject)
        new = -bound
    elif event is RepEvent.SET_MAX:
        new = bound
    elif event is RepEvent.SUPPORTIVE_SET:
        new = min(alpha * bound, bound)
    elif event is RepEvent.SET_SCORE:
        if value is None:
            raise ReputationError("SET_SCORE needs a value")
        if value < -bound:
            ledger.local_blacklist.add(subject)
        new = max(-bound, min(bound, value))
    else:
        delta = {
            RepEvent.ACK_CONFIRMED_FORWARD: alpha,
            RepEvent.GENERATOR_DEBIT: -alpha * alpha,
            RepEvent.DETECTION_REWARD: alpha * alpha,
        }[event]
        raw = old + delta
        if raw < -bound:
            ledger.local_blacklist.add(subject)
        new = max(-bound, min(bound, raw))

    ledger.scores[subject] = new
    ledger._refresh_extremes()
    return new - old


def order_message_queue(
    entries: Iterable[tuple[int, float, int]],
    blacklisted: Iterable[int] = (),
) -> list[tuple[int, float, int]]:
    """Order ``(source, source_reputation, arrival_index)`` entries for service.

    Highest reputation first, arrival order among equals.  Sources in
    ``blacklisted`` (network-blacklisted at the observer) are dropped.
    """
    banned = set(blacklisted)
    kept = [e for e in entries if e[0] not in banned]
    return sorted(kept, key=lambda e: (-e[1], e[2]))


def ordered_sources(entries: Sequence[tuple[int, float, int]], blacklisted: Iterable[int] = ()) -> list[int]:
    return [e[0] for e in order_message_queue(entries, blacklisted)]
