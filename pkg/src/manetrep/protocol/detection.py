"""Detection procedures, allegation proofs and their verification.

Everything here is a pure function of its arguments so it can be exercised
without a running simulation; :mod:`manetrep.sim.world` wires it to events.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from ..net.hello import HelloRecord
from ..reputation import RepEvent, ReputationLedger, apply_reputation_event
from .messages import ForwardCopy, Message, MsgCode, SentCopy

MAX_SENDS = 3

Point = tuple[float, float]


def _dist(a: Point, b: Point) -> float:
    # same arithmetic as the radio model so range tests agree bit for bit
    dx, dy = a[0] - b[0], a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


# --------------------------------------------------------------------------
# timing


@dataclass
class ForwardState:
    """Per-hop bookkeeping kept by the sender of one message."""

    msg: Message
    receiver: int
    t1: float
    tau_prime: float
    attempts: int = 1
    self_copy: Optional[SentCopy] = None
    acked: bool = False
    t_receipt: Optional[float] = None
    successor_queue: Optional[int] = None
    forward_proof: Optional[ForwardCopy] = None
    excused: bool = False
    investigated: bool = False
    send_times: list[float] = field(default_factory=list)

    @property
    def deadline(self) -> float:
        return self.send_times[-1] + self.tau_prime if self.send_times else self.t1 + self.tau_prime

    @property
    def tlast(self) -> float:
        return self.send_times[-1] if self.send_times else self.t1


def send_schedule(t1: float, tau_prime: float) -> tuple[list[float], float]:
    """Send instants when no acknowledgement ever arrives, and the time the
    link-breakage investigation starts."""
    return [t1 + k * tau_prime for k in range(MAX_SENDS)], t1 + MAX_SENDS * tau_prime


def compute_gamma(n_routers: int, queue_sizes: Sequence[int], tau: float, tau_prime: float) -> float:
    """How long a source waits for the end-to-end acknowledgement."""
    if len(queue_sizes) != n_routers:
        raise ValueError("one queue size per router required")
    return (
        (n_routers + 1) * tau
        + (tau + 3.0 * tau_prime) * n_routers
        + sum((m - 2) * tau for m in queue_sizes)
    )


@dataclass(frozen=True)
class PathRecord:
    source: int
    destination: int
    routers: tuple[int, ...]

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.source, *self.routers, self.destination)

    @property
    def p(self) -> int:
        return len(self.routers) + 2

    def q(self, router: int) -> int:
        """Number of nodes on the path before ``router``."""
        return self.nodes.index(router)

    def successor(self, node: int) -> int:
        nodes = self.nodes
        return nodes[nodes.index(node) + 1]

    def predecessor(self, node: int) -> int:
        nodes = self.nodes
        return nodes[nodes.index(node) - 1]


# --------------------------------------------------------------------------
# witnesses


def witness_eligible(reach, i: int, j: int, l: int) -> bool:
    """``reach[a][b]`` is True when ``b`` is in N(a)."""
    if l in (i, j):
        return False
    return (not reach[j][i]) and reach[j][l] and reach[l][j] and reach[l][i]


class WitnessVerdict(str, enum.Enum):
    CONFIRMED = "confirmed"
    NOT_CONFIRMED = "not_confirmed"
    IGNORED = "ignored"


def on_witness_copy(sent: Message, copy: Message, eligible: bool) -> WitnessVerdict:
    if not eligible:
        return WitnessVerdict.IGNORED
    same = (sent.msg_id, sent.origin_id, sent.timestamp, sent.code, sent.payload) == (
        copy.msg_id,
        copy.origin_id,
        copy.timestamp,
        copy.code,
        copy.payload,
    )
    return WitnessVerdict.CONFIRMED if same else WitnessVerdict.NOT_CONFIRMED


# --------------------------------------------------------------------------
# proofs and allegations


@dataclass(frozen=True)
class HelloHistoryBundle:
    investigator: int
    suspect: int
    t_start: float
    t_end: float
    suspect_hello_interval: float
    suspect_range: float
    investigator_range: float
    investigator_positions: tuple[tuple[float, Point], ...]
    replies: tuple[tuple[int, tuple[HelloRecord, ...]], ...]
    responder_positions: tuple[tuple[int, tuple[tuple[float, Point], ...]], ...]


@dataclass(frozen=True)
class BicastCopyPair:
    own_copy: SentCopy
    last_send: float
    successor_copy: ForwardCopy


@dataclass(frozen=True)
class RreqBundle:
    requests: tuple[Message, ...]


@dataclass(frozen=True)
class CollusionRequestCopy:
    request: Message


Proof = Union[HelloHistoryBundle, BicastCopyPair, RreqBundle, CollusionRequestCopy]


class AllegationKind(str, enum.Enum):
    LINK = "link"
    CONCEAL = "conceal"
    DELAY = "delay"
    FLOOD = "flood"
    COLLUSION = "collusion"


ALLEGATION_CODES = {
    AllegationKind.LINK: MsgCode.ALLEGATION_LINK,
    AllegationKind.CONCEAL: MsgCode.ALLEGATION_LINK,
    AllegationKind.DELAY: MsgCode.ALLEGATION_DELAY,
    AllegationKind.FLOOD: MsgCode.ALLEGATION_FLOOD,
    AllegationKind.COLLUSION: MsgCode.ALLEGATION_COLLUSION,
}

_PROOF_FOR_KIND = {
    AllegationKind.LINK: HelloHistoryBundle,
    AllegationKind.CONCEAL: HelloHistoryBundle,
    AllegationKind.DELAY: BicastCopyPair,
    AllegationKind.FLOOD: RreqBundle,
    AllegationKind.COLLUSION: CollusionRequestCopy,
}


@dataclass(frozen=True)
class AllegationPacket:
    accuser: int
    accused: int
    kind: AllegationKind
    proof: Optional[Proof]
    witness_list: tuple[int, ...] = ()
    timestamp: float = 0.0


@dataclass(frozen=True)
class ProtocolParams:
    tau: float = 0.05
    tau_prime: float = 10.0
    eta: int = 5
    blacklist_rule: str = "pseudocode"
    delay_rule: str = "prose"
    alpha: float = 2.0


# --------------------------------------------------------------------------
# link breakage


def expected_hellos(tau_prime: float, hello_interval: float) -> int:
    return math.floor(3.0 * tau_prime / hello_interval + 1e-9)


def pseudocode_hello_estimate(t1: float, t2: float, hello_interval: float) -> int:
    return math.ceil((t2 - t1) / hello_interval - 1e-9)


def _position_at(track: Sequence[tuple[float, Point]], t: float) -> Optional[Point]:
    for ts, pos in track:
        if ts == t:
            return pos
    return None


def _relevant(records: Iterable[HelloRecord], suspect: int, t_lo: float, t_hi: float) -> list[HelloRecord]:
    return [r for r in records if r.sender == suspect and t_lo <= r.timestamp < t_hi]


def union_hellos(bundle: HelloHistoryBundle) -> dict[float, HelloRecord]:
    seen: dict[float, HelloRecord] = {}
    for _, records in bundle.replies:
        for r in _relevant(records, bundle.suspect, bundle.t_start, bundle.t_end):
            seen.setdefault(r.timestamp, r)
    return dict(sorted(seen.items()))


def hello_counts(bundle: HelloHistoryBundle) -> tuple[int, int]:
    """``(x', x'')``: unique HELLOs collected and those placing the suspect in
    the investigator's range."""
    union = union_hellos(bundle)
    in_range = 0
    for t, rec in union.items():
        pos = _position_at(bundle.investigator_positions, t)
        if pos is not None and _dist(pos, rec.position) < bundle.investigator_range:
            in_range += 1
    return len(union), in_range


def link_blacklist_decision(x_collected: int, x_in_range: int, y: int, z: int, rule: str) -> bool:
    if rule == "pseudocode":
        return x_in_range >= 1 and x_in_range in (z, z - 1)
    if rule == "prose":
        return y >= 1 and x_collected >= y and x_in_range == x_collected
    raise ValueError(f"unknown blacklist_rule {rule!r}")


def find_concealers(bundle: HelloHistoryBundle) -> list[int]:
    """Responders that left out a HELLO they must have heard."""
    union = union_hellos(bundle)
    tracks = dict(bundle.responder_positions)
    out = []
    for responder, records in bundle.replies:
        have = {r.timestamp for r in _relevant(records, bundle.suspect, bundle.t_start, bundle.t_end)}
        track = tracks.get(responder, ())
        for t, rec in union.items():
            if t in have:
                continue
            pos = _position_at(track, t)
            if pos is not None and _dist(pos, rec.position) < rec.radio_range:
                out.append(responder)
                break
    return out


@dataclass(frozen=True)
class LinkAssessment:
    y: int
    z: int
    x_collected: int
    x_in_range: int
    blacklist: bool
    concealers: tuple[int, ...]
    honest_responders: tuple[int, ...]
    bundle: HelloHistoryBundle


def assess_link_breakage(
    investigator: int,
    suspect: int,
    t1: float,
    tau_prime: float,
    suspect_hello_interval: float,
    suspect_range: float,
    investigator_range: float,
    replies: Mapping[int, Sequence[HelloRecord]],
    investigator_position: Callable[[float], Point],
    responder_position: Callable[[int, float], Point],
    rule: str = "pseudocode",
) -> LinkAssessment:
    t_end = t1 + 3.0 * tau_prime
    ordered = tuple((k, tuple(replies[k])) for k in sorted(replies))
    stamps = sorted(
        {r.timestamp for _, recs in ordered for r in _relevant(recs, suspect, t1, t_end)}
    )
    bundle = HelloHistoryBundle(
        investigator=investigator,
        suspect=suspect,
        t_start=t1,
        t_end=t_end,
        suspect_hello_interval=suspect_hello_interval,
        suspect_range=suspect_range,
        investigator_range=investigator_range,
        investigator_positions=tuple((t, investigator_position(t)) for t in stamps),
        replies=ordered,
        responder_positions=tuple(
            (k, tuple((t, responder_position(k, t)) for t in stamps)) for k, _ in ordered
        ),
    )
    x1, x2 = hello_counts(bundle)
    y = expected_hellos(tau_prime, suspect_hello_interval)
    z = pseudocode_hello_estimate(t1, t_end, suspect_hello_interval)
    concealers = tuple(find_concealers(bundle))
    honest = tuple(k for k, _ in ordered if k not in concealers)
    return LinkAssessment(
        y, z, x1, x2, link_blacklist_decision(x1, x2, y, z, rule), concealers, honest, bundle
    )


# --------------------------------------------------------------------------
# deliberate delay


class DelayVerdict(str, enum.Enum):
    OK = "ok"
    SUSPECT = "suspect"
    ALLEGE = "allege"


def delay_threshold(queue_size: int, tau: float, tau_prime: float) -> float:
    return (queue_size - 1) * tau + 3.0 * tau_prime


def detect_delay(
    t1: float,
    t2: float,
    queue_size: int,
    tau: float,
    tau_prime: float,
    tlast: Optional[float] = None,
    t_receipt: Optional[float] = None,
    rule: str = "prose",
    slack: float = 1e-9,
) -> DelayVerdict:
    """Classify the gap between our first send ``t1`` and the successor's
    forward ``t2``.

    A forward is above suspicion when it happened within the successor's
    queue bound of its own receipt.
    """
    if rule == "prose":
        if t2 - t1 > delay_threshold(queue_size, tau, tau_prime):
            return DelayVerdict.ALLEGE
    elif rule == "pseudocode":
        last = t1 if tlast is None else tlast
        if t2 - last > (queue_size - 1) * tau + slack:
            return DelayVerdict.ALLEGE
        return DelayVerdict.OK
    else:
        raise ValueError(f"unknown delay_rule {rule!r}")
    ref = t1 if t_receipt is None else t_receipt
    if t2 - ref > (queue_size - 1) * tau + slack:
        return DelayVerdict.SUSPECT
    return DelayVerdict.OK


# --------------------------------------------------------------------------
# alternate path verification after the end-to-end wait expires


def verify_via_alternate_path(
    route_found: bool, successor_confirms: Optional[bool], failures_so_far: int, max_suspicions: int
) -> tuple[Optional[RepEvent], int]:
    """Returns the reputation event to apply (if any) and the updated count of
    failed route attempts."""
    if route_found:
        if successor_confirms:
            return RepEvent.ACK_CONFIRMED_FORWARD, failures_so_far
        return RepEvent.SET_MIN, failures_so_far
    failures = failures_so_far + 1
    if failures >= max_suspicions:
        return RepEvent.SET_MIN, failures
    return None, failures


# --------------------------------------------------------------------------
# route-request flooding


@dataclass
class _Window:
    start: float
    count: int
    stored: list[Message]


class RreqLimiter:
    """Per-observer accounting of route requests from each requester."""

    def __init__(self, eta: int = 5) -> None:
        self.eta = eta
        self._windows: dict[int, _Window] = {}

    def count(self, requester: int) -> int:
        w = self._windows.get(requester)
        return w.count if w else 0

    def observe(self, requester: int, rreq: Message, clock: float) -> Optional[RreqBundle]:
        w = self._windows.get(requester)
        if w is None or clock - w.start > 1.0:
            self._windows[requester] = _Window(clock, 1, [rreq])
            return None
        w.count += 1
        w.stored.append(rreq)
        if w.count <= self.eta:
            return None
        bundle = RreqBundle(tuple(w.stored[-(self.eta + 1):]))
        del self._windows[requester]
        return bundle


# --------------------------------------------------------------------------
# verification on receipt


def check_proof(packet: AllegationPacket, params: ProtocolParams) -> bool:
    proof = packet.proof
    expected = _PROOF_FOR_KIND.get(packet.kind)
    if proof is None or expected is None or not isinstance(proof, expected):
        return False
    try:
        if packet.kind is AllegationKind.LINK:
            if proof.suspect != packet.accused or proof.investigator != packet.accuser:
                return False
            if abs((proof.t_end - proof.t_start) - 3.0 * params.tau_prime) > 1e-9:
                return False
            x1, x2 = hello_counts(proof)
            y = expected_hellos(params.tau_prime, proof.suspect_hello_interval)
            z = pseudocode_hello_estimate(proof.t_start, proof.t_end, proof.suspect_hello_interval)
            return link_blacklist_decision(x1, x2, y, z, params.blacklist_rule)
        if packet.kind is AllegationKind.CONCEAL:
            if proof.investigator != packet.accuser:
                return False
            return packet.accused in find_concealers(proof)
        if packet.kind is AllegationKind.DELAY:
            own, succ = proof.own_copy, proof.successor_copy
            if own.msg_id != succ.msg_id or own.sender != packet.accuser:
                return False
            if succ.forwarder != packet.accused or succ.predecessor != packet.accuser:
                return False
            verdict = detect_delay(
                own.t_send,
                succ.t_forward,
                succ.queue_size,
                params.tau,
                params.tau_prime,
                tlast=proof.last_send,
                rule=params.delay_rule,
            )
            return verdict is DelayVerdict.ALLEGE
        if packet.kind is AllegationKind.FLOOD:
            reqs = proof.requests
            if len(reqs) < params.eta + 1:
                return False
            if any(r.code != MsgCode.RREQ or r.origin_id != packet.accused for r in reqs):
                return False
            stamps = [r.timestamp for r in reqs]
            return max(stamps) - min(stamps) <= 1.0
        if packet.kind is AllegationKind.COLLUSION:
            req = proof.request
            return req.code == MsgCode.COLLUSION_REQ and req.origin_id == packet.accused
    except (AttributeError, TypeError, ValueError):
        return False
    return False


class AllegationOutcome(str, enum.Enum):
    IGNORED = "ignored"
    GUILTY = "guilty"
    SLANDER = "slander"


def process_allegation(
    ledger: ReputationLedger, packet: AllegationPacket, params: ProtocolParams
) -> AllegationOutcome:
    """Receiver-side handling of a network-wide allegation."""
    me = ledger.observer
    if packet.accuser in ledger.network_blacklist:
        return AllegationOutcome.IGNORED
    if check_proof(packet, params):
        if packet.accused != me:
            apply_reputation_event(ledger, packet.accused, RepEvent.NETWORK_BLACKLIST, params.alpha)
        if packet.accuser != me:
            apply_reputation_event(ledger, packet.accuser, RepEvent.SET_MAX, params.alpha)
        for w in packet.witness_list:
            if w not in (me, packet.accused):
                apply_reputation_event(ledger, w, RepEvent.SET_MAX, params.alpha)
        return AllegationOutcome.GUILTY
    if packet.accuser != me:
        apply_reputation_event(ledger, packet.accuser, RepEvent.NETWORK_BLACKLIST, params.alpha)
    return AllegationOutcome.SLANDER
