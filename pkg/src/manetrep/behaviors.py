"""Node strategies: what a node does when asked to forward, witness, report
HELLOs or collude, plus Poisson traffic generation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .net.hello import HelloRecord


class StrategyKind(str, enum.Enum):
    SELFISH_SUPPORTIVE = "SelfishSupportive"
    SELFISH_INTERRUPT = "SelfishInterruptDriven"
    LINK_BREAK = "MaliciousLinkBreak"
    DELAY = "MaliciousDelay"
    FLOOD = "MaliciousFlood"
    COLLUDE = "MaliciousCollude"
    SLANDER = "MaliciousSlander"

    @property
    def malicious(self) -> bool:
        return self.value.startswith("Malicious")


MALICIOUS_KINDS = (
    StrategyKind.LINK_BREAK,
    StrategyKind.DELAY,
    StrategyKind.FLOOD,
    StrategyKind.COLLUDE,
    StrategyKind.SLANDER,
)


@dataclass
class Strategy:
    kind: StrategyKind
    extra_delay: float = 0.0
    flood_rate: float = 0.0
    slander_interval: float = 30.0
    pact: frozenset[int] = field(default_factory=frozenset)

    @property
    def malicious(self) -> bool:
        return self.kind.malicious


class ForwardKind(str, enum.Enum):
    FORWARD = "forward"
    SILENT = "silent"


@dataclass(frozen=True)
class ForwardAction:
    kind: ForwardKind
    extra_delay: float = 0.0
    acknowledge: bool = True
    request_collusion: bool = False


def decide_forward_action(strategy: Strategy) -> ForwardAction:
    k = strategy.kind
    if k is StrategyKind.LINK_BREAK:
        return ForwardAction(ForwardKind.SILENT, acknowledge=False)
    if k is StrategyKind.COLLUDE:
        return ForwardAction(ForwardKind.SILENT, acknowledge=False, request_collusion=True)
    if k is StrategyKind.DELAY:
        return ForwardAction(ForwardKind.FORWARD, extra_delay=strategy.extra_delay)
    return ForwardAction(ForwardKind.FORWARD)


def decide_witness_action(strategy: Strategy, eligible: bool) -> bool:
    """True when the node volunteers a witness copy."""
    return eligible and strategy.kind is StrategyKind.SELFISH_SUPPORTIVE


class ReplyMode(str, enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    REFUSE = "refuse"


def decide_hello_reply(
    strategy: Strategy, records: Sequence[HelloRecord], accused: int
) -> tuple[ReplyMode, list[HelloRecord]]:
    records = list(records)
    if strategy.kind is StrategyKind.COLLUDE and accused in strategy.pact and records:
        return ReplyMode.PARTIAL, records[:-1]
    return ReplyMode.FULL, records


class CollusionResponse(str, enum.Enum):
    ALLEGE = "allege"
    COMPLY = "comply"


def handle_collusion_request(strategy: Strategy, requester: int) -> CollusionResponse:
    if strategy.kind is StrategyKind.COLLUDE and requester in strategy.pact:
        return CollusionResponse.COMPLY
    return CollusionResponse.ALLEGE


def next_traffic_event(
    rate: float, rng: np.random.Generator, clock: float, source: int, n_nodes: int
) -> Optional[tuple[float, int]]:
    """Next Poisson arrival and a uniformly chosen destination other than
    ``source``; ``None`` for a silent source."""
    if rate <= 0 or n_nodes < 2:
        return None
    t = clock + float(rng.exponential(1.0 / rate))
    dest = int(rng.integers(0, n_nodes - 1))
    if dest >= source:
        dest += 1
    return t, dest


def pick_malicious_strategy(rng: np.random.Generator, pinned: Optional[StrategyKind] = None) -> StrategyKind:
    if pinned is not None:
        return StrategyKind(pinned)
    return MALICIOUS_KINDS[int(rng.integers(0, len(MALICIOUS_KINDS)))]
