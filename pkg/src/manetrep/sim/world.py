"""Discrete-event simulation of a MANET where every node runs the
reputation protocol.

The :class:`World` owns all node state and the event queue.  Mobility is
advanced lazily in fixed steps whenever the clock passes a step boundary, so
every lookup of "where was node x at time t" resolves to the same snapshot
the radio model used at that time.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import apd
from ..behaviors import (
    CollusionResponse,
    ForwardKind,
    Strategy,
    StrategyKind,
    decide_forward_action,
    decide_hello_reply,
    decide_witness_action,
    handle_collusion_request,
    next_traffic_event,
    pick_malicious_strategy,
)
from ..harness.config import SimConfig
from ..net.encoding import NodeAttributes
from ..net.events import EventQueue, SimEvent
from ..net.hello import HelloArchive, HelloRecord
from ..net.mobility import WaypointState, initial_state, step_waypoint
from ..net.topology import adjacency, hop_distances, reach_matrix, shortest_path
from ..protocol.detection import (
    MAX_SENDS,
    AllegationKind,
    AllegationOutcome,
    AllegationPacket,
    BicastCopyPair,
    CollusionRequestCopy,
    DelayVerdict,
    ForwardState,
    PathRecord,
    ProtocolParams,
    RreqLimiter,
    assess_link_breakage,
    compute_gamma,
    detect_delay,
    process_allegation,
    verify_via_alternate_path,
    witness_eligible,
)
from ..protocol.messages import (
    DataPayload,
    ForwardCopy,
    Message,
    MsgCode,
    OriginRegistry,
    RreqPayload,
    SentCopy,
)
from ..reputation import (
    RepEvent,
    ReputationLedger,
    apply_reputation_event,
    comparative_reputation,
    expectation,
    init_peer,
    order_message_queue,
)


@dataclass
class Node:
    id: int
    strategy: Strategy
    ledger: ReputationLedger
    archive: HelloArchive
    radio_range: float
    hello_interval: int
    queue_size: int
    limiter: RreqLimiter
    originator: object
    energy: float = 0.0
    fwd: dict = field(default_factory=dict)  # msg_id -> ForwardState (as sender)
    held: dict = field(default_factory=dict)  # msg_id -> (predecessor, t_receipt, arrival_idx)
    copies: dict = field(default_factory=dict)  # msg_id -> ForwardCopy
    seen: set = field(default_factory=set)
    queue: list = field(default_factory=list)  # msg_ids waiting for service
    busy_until: float = 0.0
    service_pending: bool = False
    rreq_log: deque = field(default_factory=deque)
    arrivals: int = 0

    @property
    def malicious(self) -> bool:
        return self.strategy.malicious


@dataclass
class MsgInfo:
    msg: Message
    path: PathRecord
    t_created: float
    gamma: float = 0.0
    delivered: bool = False
    e2e_acked: bool = False
    attacked_by: Optional[int] = None
    data_energy: dict = field(default_factory=dict)  # node -> energy spent on this message


@dataclass
class RunStats:
    """Raw counters collected while the simulation runs."""

    generated: int = 0
    unroutable: int = 0
    delivered: int = 0
    investigations: int = 0
    allegations: list = field(default_factory=list)  # (time, kind, accuser, accused)
    rep_gain: dict = field(default_factory=dict)
    rep_loss: dict = field(default_factory=dict)
    forgone_reward: dict = field(default_factory=dict)
    attack_energy: dict = field(default_factory=dict)  # attacker -> energy wasted by others
    damage_energy: dict = field(default_factory=dict)  # victim -> attack-attributed energy
    acted: set = field(default_factory=set)
    first_attack: dict = field(default_factory=dict)
    blacklist_time: dict = field(default_factory=dict)  # accused -> time all others blacklisted
    gamma_waits: list = field(default_factory=list)  # (msg_id, measured wait, expected wait)


class World:
    def __init__(
        self,
        cfg: SimConfig,
        seed: Optional[int] = None,
        positions: Optional[np.ndarray] = None,
        ranges: Optional[np.ndarray] = None,
        hello_intervals: Optional[list[int]] = None,
        strategies: Optional[dict[int, StrategyKind]] = None,
        static: bool = False,
        traffic: bool = True,
        keep_trace: bool = False,
    ) -> None:
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.n = cfg.node_count
        self.params = ProtocolParams(
            tau=cfg.tau,
            tau_prime=cfg.tau_prime,
            eta=cfg.eta,
            blacklist_rule=cfg.blacklist_rule,
            delay_rule=cfg.delay_rule,
            alpha=cfg.alpha,
        )
        self.delta = cfg.tx_delay
        self.eq = EventQueue()
        self.stats = RunStats()
        self.keep_trace = keep_trace
        self.trace: list[str] = []
        self._hash = hashlib.sha256()
        self.messages: dict[int, MsgInfo] = {}
        self.static = static or cfg.v_max == 0
        self.traffic_enabled = traffic

        ss = np.random.SeedSequence(self.seed)
        world_ss, place_ss, *node_ss = ss.spawn(2 + 3 * self.n)
        self.rng = np.random.default_rng(world_ss)
        place_rng = np.random.default_rng(place_ss)
        self.mob_rng = [np.random.default_rng(s) for s in node_ss[0 : self.n]]
        self.traffic_rng = [np.random.default_rng(s) for s in node_ss[self.n : 2 * self.n]]
        self.behave_rng = [np.random.default_rng(s) for s in node_ss[2 * self.n : 3 * self.n]]

        area = (cfg.area_width, cfg.area_height)
        self.area = area
        if ranges is None:
            ranges = place_rng.uniform(cfg.min_radio, cfg.max_radio, self.n)
        self.ranges = np.asarray(ranges, float)
        if hello_intervals is None:
            hello_intervals = [int(v) for v in place_rng.integers(cfg.hello_min, cfg.hello_max + 1, self.n)]
        self.wp: list[WaypointState] = []
        for k in range(self.n):
            st = initial_state(self.mob_rng[k], area, cfg.v_max, cfg.pause_max)
            if positions is not None:
                st = WaypointState(tuple(map(float, positions[k])), st.target, st.speed, st.pause_remaining)
            if self.static:
                st = WaypointState(st.position, st.position, 0.0, 0.0)
            self.wp.append(st)
        self.pos = np.array([s.position for s in self.wp], float)
        self.pos_history: list[np.ndarray] = [self.pos.copy()]
        self.tick = 0
        self._refresh_topology()

        kinds = self._assign_strategies(strategies)
        registry = OriginRegistry()
        self.nodes: list[Node] = []
        for k in range(self.n):
            self.nodes.append(
                Node(
                    id=k,
                    strategy=self._make_strategy(k, kinds[k]),
                    ledger=ReputationLedger(observer=k, phi_size=cfg.phi_size),
                    archive=HelloArchive(owner=k),
                    radio_range=float(self.ranges[k]),
                    hello_interval=int(hello_intervals[k]),
                    queue_size=cfg.queue_size,
                    limiter=RreqLimiter(cfg.eta),
                    originator=registry.issue(k),
                )
            )
        self._schedule_initial()

    # ------------------------------------------------------------------ setup

    def _assign_strategies(self, explicit: Optional[dict[int, StrategyKind]]) -> list[StrategyKind]:
        cfg = self.cfg
        kinds: list[Optional[StrategyKind]] = [None] * self.n
        if explicit is not None:
            for k, v in explicit.items():
                kinds[k] = StrategyKind(v)
        else:
            for k, v in cfg.parsed_pins().items():
                kinds[k] = v
            n_mal = cfg.malicious_count - sum(1 for v in kinds if v is not None and v.malicious)
            free = [k for k in range(self.n) if kinds[k] is None]
            chosen = sorted(self.rng.choice(free, size=n_mal, replace=False).tolist()) if n_mal > 0 else []
            queue = [kind for kind, c in cfg.parsed_counts() for _ in range(c)]
            pinned = cfg.pinned_strategy()
            for k in chosen:
                kinds[k] = queue.pop(0) if queue else pick_malicious_strategy(self.behave_rng[k], pinned)
        for k in range(self.n):
            if kinds[k] is None:
                supportive = self.behave_rng[k].random() < cfg.supportive_fraction
                kinds[k] = StrategyKind.SELFISH_SUPPORTIVE if supportive else StrategyKind.SELFISH_INTERRUPT
        return kinds  # type: ignore[return-value]

    def _make_strategy(self, k: int, kind: StrategyKind) -> Strategy:
        cfg = self.cfg
        return Strategy(
            kind=kind,
            extra_delay=cfg.effective_delay_extra if kind is StrategyKind.DELAY else 0.0,
            flood_rate=cfg.effective_flood_rate if kind is StrategyKind.FLOOD else 0.0,
            slander_interval=cfg.slander_interval,
        )

    def _form_pacts(self) -> None:
        colluders = [n.id for n in self.nodes if n.strategy.kind is StrategyKind.COLLUDE]
        for a, b in zip(colluders[0::2], colluders[1::2]):
            self.nodes[a].strategy.pact = frozenset({b})
            self.nodes[b].strategy.pact = frozenset({a})

    def _schedule_initial(self) -> None:
        self._form_pacts()
        T = self.cfg.sim_time
        for node in self.nodes:
            first = float(self.behave_rng[node.id].uniform(0.0, node.hello_interval))
            if first <= T:
                self.eq.schedule(first, "hello", node.id)
            k = node.strategy.kind
            if k is StrategyKind.FLOOD:
                self.eq.schedule(min(self.cfg.flood_start, T), "flood", node.id)
            elif k is StrategyKind.SLANDER:
                t = float(self.behave_rng[node.id].uniform(0.0, node.strategy.slander_interval))
                if t <= T:
                    self.eq.schedule(t, "slander", node.id)
            if self.traffic_enabled and not node.malicious:
                self._schedule_traffic(node.id, 0.0)

    def _schedule_traffic(self, k: int, now: float) -> None:
        nxt = next_traffic_event(self.cfg.traffic_rate, self.traffic_rng[k], now, k, self.n)
        if nxt is not None and nxt[0] <= self.cfg.sim_time:
            self.eq.schedule(nxt[0], "traffic", k, nxt[1])

    # --------------------------------------------------------------- topology

    def _refresh_topology(self) -> None:
        self.reach = reach_matrix(self.pos, self.ranges)
        self.adj = adjacency(self.reach)
        self._route_cache: dict = {}

    def _sync_mobility(self, t: float) -> None:
        if self.static:
            return
        step = self.cfg.mobility_step
        while (self.tick + 1) * step <= t:
            for k in range(self.n):
                self.wp[k] = step_waypoint(
                    self.wp[k], step, self.mob_rng[k], self.area, self.cfg.v_max, self.cfg.pause_max
                )
            self.pos = np.array([s.position for s in self.wp], float)
            self.pos_history.append(self.pos.copy())
            self.tick += 1
            self._refresh_topology()
            self._departure_notices()

    def position_at(self, k: int, t: float) -> tuple[float, float]:
        if self.static:
            return tuple(self.pos_history[0][k])
        idx = min(int(t // self.cfg.mobility_step), len(self.pos_history) - 1)
        return (float(self.pos_history[idx][k, 0]), float(self.pos_history[idx][k, 1]))

    def in_range(self, a: int, b: int) -> bool:
        """True when ``b`` is in N(a) right now."""
        return bool(self.reach[a, b])

    def route(self, a: int, b: int, exclude: tuple[int, ...] = ()) -> Optional[list[int]]:
        key = (a, b, exclude)
        if key not in self._route_cache:
            self._route_cache[key] = shortest_path(self.adj, a, b, exclude, self.cfg.H)
        return self._route_cache[key]

    def attributes(self, k: int) -> NodeAttributes:
        x, y = self.pos[k]
        return NodeAttributes(
            node_id=k,
            lat=float(x),
            long=float(y),
            radio_range=float(self.ranges[k]),
            velocity=float(self.wp[k].speed),
            hello_interval=float(self.nodes[k].hello_interval),
            processing_time=self.cfg.tau,
            queue_size=self.nodes[k].queue_size,
        )

    # ------------------------------------------------------------ accounting

    def _spend(self, k: int, n_tx: int = 1, msg_id: Optional[int] = None, attacker: Optional[int] = None) -> None:
        e = n_tx * self.cfg.sigma
        self.nodes[k].energy += e
        if msg_id is not None:
            info = self.messages[msg_id]
            info.data_energy[k] = info.data_energy.get(k, 0.0) + e
        if attacker is not None and attacker != k:
            self.stats.attack_energy[attacker] = self.stats.attack_energy.get(attacker, 0.0) + e
            self.stats.damage_energy[k] = self.stats.damage_energy.get(k, 0.0) + e

    def _rep(self, observer: int, subject: int, event: RepEvent, value: Optional[float] = None) -> float:
        if observer == subject:
            return 0.0
        delta = apply_reputation_event(self.nodes[observer].ledger, subject, event, self.cfg.alpha, value)
        if delta > 0:
            self.stats.rep_gain[subject] = self.stats.rep_gain.get(subject, 0.0) + delta
        elif delta < 0:
            self.stats.rep_loss[subject] = self.stats.rep_loss.get(subject, 0.0) - delta
        return delta

    def _acted(self, k: int, t: float) -> None:
        if self.nodes[k].malicious:
            self.stats.acted.add(k)
            self.stats.first_attack.setdefault(k, t)

    def _send_control(
        self,
        a: int,
        b: int,
        kind: str,
        payload=None,
        exclude: tuple[int, ...] = (),
        attacker: Optional[int] = None,
        extra_delay: float = 0.0,
    ) -> bool:
        """Unicast a control packet over the current shortest route."""
        if self.in_range(a, b) and b not in exclude:
            path = [a, b]
        else:
            path = self.route(a, b, exclude)
        if path is None:
            self._spend(a, 1, attacker=attacker)
            return False
        for hop in path[:-1]:
            self._spend(hop, 1, attacker=attacker)
        self.eq.schedule(self.eq.now + extra_delay + (len(path) - 1) * self.delta, kind, a, b, payload)
        return True

    # ------------------------------------------------------------------- run

    def run(self, until: Optional[float] = None) -> RunStats:
        """Process events up to ``until`` (default: the configured sim time).

        Calling again resumes where the previous call stopped.
        """
        T = self.cfg.sim_time if until is None else min(until, self.cfg.sim_time)
        handlers: dict[str, Callable[[SimEvent], None]] = {
            "hello": self._on_hello,
            "traffic": self._on_traffic,
            "deliver": self._on_deliver,
            "timeout": self._on_timeout,
            "receipt_ack": self._on_receipt_ack,
            "service": self._on_service,
            "forward": self._on_forward,
            "forward_proof": self._on_forward_proof,
            "e2e_ack": self._on_e2e_ack,
            "gamma": self._on_gamma,
            "verify": self._on_verify,
            "investigate": self._on_investigate,
            "allegation": self._on_allegation,
            "flood": self._on_flood,
            "slander": self._on_slander,
            "collusion_req": self._on_collusion_req,
            "departure": self._on_departure,
        }
        while len(self.eq):
            t = self.eq.peek_time()
            if t is None or t > T:
                break
            ev = self.eq.pop()
            self._sync_mobility(ev.time)
            line = f"{ev.time:.6f} {ev.kind} {ev.src} {ev.dst}"
            self._hash.update(line.encode())
            self._hash.update(b"\n")
            if self.keep_trace:
                self.trace.append(line)
            handlers[ev.kind](ev)
        self._sync_mobility(T)
        return self.stats

    @property
    def trace_hash(self) -> str:
        return self._hash.hexdigest()

    # --------------------------------------------------------------- beacons

    def _on_hello(self, ev: SimEvent) -> None:
        k = ev.src
        node = self.nodes[k]
        now = ev.time
        self._spend(k)
        downs = tuple(self.adj[k])
        ups = tuple(np.flatnonzero(self.reach[:, k]).tolist())
        rec = HelloRecord(
            sender=k,
            position=self.position_at(k, now),
            timestamp=now,
            radio_range=node.radio_range,
            hello_interval=float(node.hello_interval),
            sender_neighbors=downs,
            sender_uplinks=ups,
        )
        for j in downs:
            self.nodes[j].archive.append(rec)
            self._spend(j)  # HELLO_ACK
        nxt = now + node.hello_interval
        if nxt <= self.cfg.sim_time:
            self.eq.schedule(nxt, "hello", k)

    # -------------------------------------------------------------- traffic

    def _send_rreq(self, k: int, dest: int, now: float, honest: bool = True) -> None:
        node = self.nodes[k]
        if honest:
            log = node.rreq_log
            while log and log[0] < now - 1.0:
                log.popleft()
            if len(log) >= self.cfg.eta:
                return
            log.append(now)
        msg = node.originator.create(MsgCode.RREQ, now, RreqPayload(k, dest), None)
        self._spend(k)
        for j in self.adj[k]:
            self._receive_rreq(j, k, msg, now)

    def _receive_rreq(self, j: int, requester: int, msg: Message, now: float) -> None:
        node = self.nodes[j]
        if requester in node.ledger.network_blacklist:
            return
        if node.strategy.kind is StrategyKind.FLOOD:
            return
        bundle = node.limiter.observe(requester, msg, now)
        if bundle is not None:
            self._broadcast_allegation(
                AllegationPacket(j, requester, AllegationKind.FLOOD, bundle, (), now)
            )
            return
        # the accepted request is rebroadcast once
        attacker = requester if self.nodes[requester].strategy.kind is StrategyKind.FLOOD else None
        self._spend(j, attacker=attacker)

    def _on_traffic(self, ev: SimEvent) -> None:
        k, dest, now = ev.src, ev.dst, ev.time
        self._schedule_traffic(k, now)
        self.inject(k, dest, now)

    def inject(self, k: int, dest: int, now: float, path: Optional[list[int]] = None) -> Optional[int]:
        """Originate one DATA packet from ``k`` to ``dest``; returns its id."""
        node = self.nodes[k]
        if dest in node.ledger.local_blacklist:
            return None
        self.stats.generated += 1
        self._send_rreq(k, dest, now)
        if path is None:
            path = self.route(k, dest, tuple(sorted(node.ledger.local_blacklist)))
        if path is None or len(path) < 2:
            self.stats.unroutable += 1
            return None
        rec = PathRecord(path[0], path[-1], tuple(path[1:-1]))
        msg = node.originator.create(
            MsgCode.DATA, now, DataPayload(k, dest, tuple(path)), self.attributes(k)
        )
        gamma = compute_gamma(
            len(rec.routers), [self.nodes[r].queue_size for r in rec.routers], self.cfg.tau, self.cfg.tau_prime
        )
        self.messages[msg.msg_id] = MsgInfo(msg, rec, now, gamma)
        self.eq.schedule(now + gamma, "gamma", k, dest, msg.msg_id)
        self._start_hop(k, path[1], msg, now)
        return msg.msg_id

    # ---------------------------------------------------------- hop delivery

    def _start_hop(self, i: int, j: int, msg: Message, now: float) -> None:
        node = self.nodes[i]
        init_peer(node.ledger, j)
        st = ForwardState(msg=msg, receiver=j, t1=now, tau_prime=self.cfg.tau_prime)
        st.self_copy = SentCopy(msg.msg_id, i, j, now)  # bicast copy kept as reply1
        node.fwd[msg.msg_id] = st
        self._transmit(i, j, st, now)

    def _transmit(self, i: int, j: int, st: ForwardState, now: float) -> None:
        st.send_times.append(now)
        st.attempts = len(st.send_times)
        self._spend(i, 1, msg_id=st.msg.msg_id)
        self.eq.schedule(now + self.delta, "deliver", i, j, st.msg.msg_id)
        self.eq.schedule(now + self.cfg.tau_prime, "timeout", i, j, (st.msg.msg_id, st.attempts))

    def _on_deliver(self, ev: SimEvent) -> None:
        i, j, msg_id = ev.src, ev.dst, ev.payload
        if not self.in_range(i, j):
            return  # lost in flight
        info = self.messages[msg_id]
        node = self.nodes[j]
        now = ev.time
        source = info.path.source
        init_peer(node.ledger, i)
        init_peer(node.ledger, source)
        duplicate = msg_id in node.seen
        node.seen.add(msg_id)

        if j == info.path.destination:
            self._send_control(j, i, "receipt_ack", (msg_id, now, node.queue_size, False))
            if not duplicate:
                info.delivered = True
                self.stats.delivered += 1
                self._send_control(j, i, "e2e_ack", (msg_id, {}))
            return

        if source in node.ledger.network_blacklist:
            self._send_control(j, i, "receipt_ack", (msg_id, now, node.queue_size, True))
            return

        action = decide_forward_action(node.strategy)
        if action.kind is ForwardKind.SILENT:
            if not duplicate:
                self._acted(j, now)
                info.attacked_by = j
                self._record_forgone(info, j)
                if action.request_collusion:
                    self._request_collusion(j, i, now)
            self._attribute_message_energy(info, j)
            return

        self._send_control(j, i, "receipt_ack", (msg_id, now, node.queue_size, False))
        if duplicate:
            return
        node.ledger.traffic_generated[source] = node.ledger.traffic_generated.get(source, 0) + 1
        node.held[msg_id] = (i, now, node.arrivals)
        node.arrivals += 1
        node.queue.append(msg_id)
        if not node.service_pending:
            node.service_pending = True
            self.eq.schedule(max(now, node.busy_until), "service", j)

    def _record_forgone(self, info: MsgInfo, attacker: int) -> None:
        nodes = info.path.nodes
        idx = nodes.index(attacker)
        for r in nodes[1:idx]:
            if not self.nodes[r].malicious:
                self.stats.forgone_reward[r] = self.stats.forgone_reward.get(r, 0.0) + self.cfg.alpha

    def _attribute_message_energy(self, info: MsgInfo, attacker: int) -> None:
        """Move energy already spent on a dropped message onto the attacker's account."""
        for k, e in info.data_energy.items():
            if k == attacker:
                continue
            self.stats.attack_energy[attacker] = self.stats.attack_energy.get(attacker, 0.0) + e
            self.stats.damage_energy[k] = self.stats.damage_energy.get(k, 0.0) + e
        info.data_energy.clear()

    def _on_receipt_ack(self, ev: SimEvent) -> None:
        j, i = ev.src, ev.dst
        msg_id, t_receipt, queue_size, discarded = ev.payload
        st = self.nodes[i].fwd.get(msg_id)
        if st is None or st.receiver != j:
            return
        if not st.acked:
            st.acked = True
            st.t_receipt = t_receipt
            st.successor_queue = queue_size
        if discarded:
            st.excused = True

    def _on_timeout(self, ev: SimEvent) -> None:
        i, j = ev.src, ev.dst
        msg_id, attempt = ev.payload
        st = self.nodes[i].fwd.get(msg_id)
        if st is None or st.acked or st.excused or st.forward_proof is not None:
            return
        if attempt != st.attempts:
            return
        if st.attempts < MAX_SENDS:
            self._transmit(i, j, st, ev.time)
        else:
            self.eq.schedule(ev.time, "investigate", i, j, msg_id)

    # ---------------------------------------------------------- forwarding

    def _on_service(self, ev: SimEvent) -> None:
        j = ev.src
        node = self.nodes[j]
        now = ev.time
        if not node.queue:
            node.service_pending = False
            return
        led = node.ledger
        entries = []
        for msg_id in node.queue:
            src = self.messages[msg_id].path.source
            entries.append((msg_id, led.score(src), node.held[msg_id][2]))
        banned = {m for m in node.queue if self.messages[m].path.source in led.network_blacklist}
        order = order_message_queue(entries, banned)
        for m in banned:
            node.queue.remove(m)
            node.held.pop(m, None)
        if not order:
            node.service_pending = False
            return
        msg_id = order[0][0]
        node.queue.remove(msg_id)
        action = decide_forward_action(node.strategy)
        t_fwd = now + action.extra_delay
        if action.extra_delay > 0:
            self._acted(j, now)
            self.messages[msg_id].attacked_by = j
        self.eq.schedule(t_fwd, "forward", j, -1, msg_id)
        node.busy_until = now + self.cfg.tau
        if node.queue:
            self.eq.schedule(node.busy_until, "service", j)
        else:
            node.service_pending = False

    def _on_forward(self, ev: SimEvent) -> None:
        j, msg_id, now = ev.src, ev.payload, ev.time
        node = self.nodes[j]
        info = self.messages[msg_id]
        pred, t_receipt, _ = node.held.pop(msg_id, (info.path.predecessor(j), now, 0))
        src = info.path.source
        node.ledger.traffic_forwarded[src] = min(
            node.ledger.traffic_forwarded.get(src, 0) + 1, node.ledger.traffic_generated.get(src, 0)
        )
        copy = ForwardCopy(msg_id, j, pred, now, node.queue_size)
        node.copies[msg_id] = copy
        k = info.path.successor(j)
        self._start_hop(j, k, info.msg, now)

        # the bicast forward doubles as proof for the predecessor
        if self.in_range(j, pred):
            self.eq.schedule(now + self.delta, "forward_proof", j, pred, (copy, None))
            return
        witnesses = sorted(
            l
            for l in map(int, np.flatnonzero(self.reach[j]))
            if witness_eligible(self.reach, pred, j, l)
            and decide_witness_action(self.nodes[l].strategy, True)
        )
        if witnesses:
            l = witnesses[0]
            self._spend(l)
            self.eq.schedule(now + 2 * self.delta, "forward_proof", j, pred, (copy, l))

    def _on_forward_proof(self, ev: SimEvent) -> None:
        j, i = ev.src, ev.dst
        copy, witness = ev.payload
        st = self.nodes[i].fwd.get(copy.msg_id)
        if st is None or st.receiver != j:
            return
        if witness is not None:
            self._rep(i, witness, RepEvent.SUPPORTIVE_SET)
            self._rep(j, witness, RepEvent.SUPPORTIVE_SET)
        self._learn_forward(i, st, copy, ev.time)

    def _learn_forward(self, i: int, st: ForwardState, copy: ForwardCopy, now: float) -> None:
        if st.forward_proof is not None:
            return
        st.forward_proof = copy
        if not st.acked:
            st.acked = True
            st.t_receipt = st.t_receipt if st.t_receipt is not None else copy.t_forward
            st.successor_queue = copy.queue_size
        j = st.receiver
        verdict = detect_delay(
            st.t1,
            copy.t_forward,
            copy.queue_size,
            self.cfg.tau,
            self.cfg.tau_prime,
            tlast=st.tlast,
            t_receipt=st.t_receipt,
            rule=self.cfg.delay_rule,
        )
        if verdict is DelayVerdict.ALLEGE:
            proof = BicastCopyPair(st.self_copy, st.tlast, copy)
            self._broadcast_allegation(AllegationPacket(i, j, AllegationKind.DELAY, proof, (), now))
        elif verdict is DelayVerdict.SUSPECT:
            led = self.nodes[i].ledger
            led.delay_count[j] = led.delay_count.get(j, 0) + 1
            if led.delay_count[j] >= self.cfg.M:
                self._rep(i, j, RepEvent.SET_MIN)
            else:
                z = apd.correctness_delay(copy.t_forward, st.t1, copy.queue_size, self.cfg.tau, self.cfg.tau_prime)
                self._apd(i, j, z, None, led.delay_count[j])

    def _apd(self, i: int, j: int, z: float, p: Optional[float], count: int) -> None:
        led = self.nodes[i].ledger
        init_peer(led, j)
        c = comparative_reputation(led, j)
        gen = led.traffic_generated.get(j, 0)
        e = expectation(min(led.traffic_forwarded.get(j, 0), gen), gen)
        new = apd.apd_update(
            led.score(j),
            apd.ApdInputs(c=c, e=e, z=z, p=p),
            count,
            self.cfg.M,
            self.cfg.phi_size,
            self.cfg.H,
            self.cfg.penalty_mode,
        )
        self._rep(i, j, RepEvent.SET_SCORE, new)

    # ----------------------------------------------------- end-to-end ack

    def _on_e2e_ack(self, ev: SimEvent) -> None:
        sender, p = ev.src, ev.dst
        msg_id, carried = ev.payload
        info = self.messages[msg_id]
        path = info.path
        node = self.nodes[p]
        succ = path.successor(p)
        if succ != path.destination:
            self._rep(p, succ, RepEvent.ACK_CONFIRMED_FORWARD)
        st = node.fwd.get(msg_id)
        if st is not None and st.forward_proof is None and succ in carried:
            self._learn_forward(p, st, carried[succ], ev.time)
        if p == path.source:
            info.e2e_acked = True
            return
        self._rep(p, path.source, RepEvent.GENERATOR_DEBIT)
        carried = dict(carried)
        if msg_id in node.copies:
            carried[p] = node.copies[msg_id]
        self._send_control(p, path.predecessor(p), "e2e_ack", (msg_id, carried))

    def _on_gamma(self, ev: SimEvent) -> None:
        msg_id = ev.payload
        info = self.messages[msg_id]
        self.stats.gamma_waits.append((msg_id, ev.time - info.t_created, info.gamma))
        if info.e2e_acked:
            return
        nodes = info.path.nodes
        for idx in range(len(nodes) - 2):
            p, r = nodes[idx], nodes[idx + 1]
            st = self.nodes[p].fwd.get(msg_id)
            if st is None or not st.acked or st.excused or st.forward_proof is not None:
                continue
            copy = self.nodes[r].copies.get(msg_id)
            if copy is not None:
                if self._send_control(r, p, "forward_proof", (copy, None)):
                    continue
            self.eq.schedule(ev.time + 2 * self.cfg.H * self.delta, "verify", p, r, msg_id)

    def _on_verify(self, ev: SimEvent) -> None:
        p, r, msg_id = ev.src, ev.dst, ev.payload
        st = self.nodes[p].fwd.get(msg_id)
        if st is None or st.forward_proof is not None or st.excused:
            return
        info = self.messages[msg_id]
        k = info.path.successor(r)
        led = self.nodes[p].ledger
        init_peer(led, r)
        path = self.route(p, k, (r,))
        confirms = None
        if path is not None:
            for hop in path[:-1]:
                self._spend(hop, 2)
            confirms = msg_id in self.nodes[k].seen
        event, failures = verify_via_alternate_path(path is not None, confirms, led.alt_path_failures.get(r, 0), self.cfg.M)
        led.alt_path_failures[r] = failures
        if event is not None:
            self._rep(p, r, event)

    # --------------------------------------------------------- departures

    def _departure_notices(self) -> None:
        step = self.cfg.mobility_step
        for node in self.nodes:
            if not node.held or node.malicious:
                continue
            j = node.id
            s = self.wp[j]
            nx, ny = s.position
            if s.pause_remaining <= 0 and s.speed > 0:
                tx, ty = s.target
                d = math.hypot(tx - nx, ty - ny)
                f = min(1.0, s.speed * step / d) if d > 0 else 0.0
                nx, ny = nx + (tx - nx) * f, ny + (ty - ny) * f
            for msg_id, (pred, _, _) in list(node.held.items()):
                px, py = self.pos[pred]
                if self.in_range(pred, j) and math.sqrt((px - nx) ** 2 + (py - ny) ** 2) >= self.ranges[pred]:
                    self._send_control(j, pred, "departure", msg_id)

    def _on_departure(self, ev: SimEvent) -> None:
        j, i, msg_id = ev.src, ev.dst, ev.payload
        st = self.nodes[i].fwd.get(msg_id)
        if st is not None and st.receiver == j:
            st.excused = True

    # ------------------------------------------------------ investigation

    def _on_investigate(self, ev: SimEvent) -> None:
        i, j, msg_id = ev.src, ev.dst, ev.payload
        now = ev.time
        me = self.nodes[i]
        st = me.fwd.get(msg_id)
        if st is None or st.acked or st.excused or st.forward_proof is not None or st.investigated:
            return
        st.investigated = True
        info = self.messages[msg_id]
        suspect = self.nodes[j]
        attacker = j if suspect.malicious else None
        self.stats.investigations += 1
        init_peer(me.ledger, j)

        # alternate route to the suspect's successor (or any other neighbour of a silent destination)
        if j != info.path.destination:
            target = info.path.successor(j)
        else:
            others = [int(x) for x in np.flatnonzero(self.reach[j]) if x != i]
            target = others[0] if others else None
        self._spend(i, attacker=attacker)  # route request
        if target is None or self.route(i, target, (j,)) is None:
            return

        responders = [int(k) for k in np.flatnonzero(self.reach[j]) if k not in (i, j)]
        replies: dict[int, list[HelloRecord]] = {}
        t1 = st.t1
        t_end = t1 + 3.0 * self.cfg.tau_prime
        for k in responders:
            path = self.route(i, k, (j,))
            if path is None:
                continue
            hops = len(path) - 1
            self._spend(i, hops, attacker=attacker)
            self._spend(k, hops, attacker=attacker)
            records = self.nodes[k].archive.query(j, t1, t_end)
            mode, sent = decide_hello_reply(self.nodes[k].strategy, records, j)
            if len(sent) < len(records):
                self._acted(k, now)
            replies[k] = sent
        a = assess_link_breakage(
            investigator=i,
            suspect=j,
            t1=t1,
            tau_prime=self.cfg.tau_prime,
            suspect_hello_interval=float(suspect.hello_interval),
            suspect_range=suspect.radio_range,
            investigator_range=me.radio_range,
            replies=replies,
            investigator_position=lambda t: self.position_at(i, t),
            responder_position=lambda k, t: self.position_at(k, t),
            rule=self.cfg.blacklist_rule,
        )
        for c in a.concealers:
            self._broadcast_allegation(
                AllegationPacket(i, c, AllegationKind.CONCEAL, a.bundle, a.honest_responders, now)
            )
        if a.blacklist:
            self._broadcast_allegation(
                AllegationPacket(i, j, AllegationKind.LINK, a.bundle, a.honest_responders, now)
            )
            return
        led = me.ledger
        led.link_break_count[j] = led.link_break_count.get(j, 0) + 1
        if led.link_break_count[j] >= self.cfg.M:
            self._rep(i, j, RepEvent.SET_MIN)
        else:
            y = a.y
            x1 = min(a.x_collected, y)
            x2 = min(a.x_in_range, x1)
            z = apd.correctness_link(x2, x1, y) if y > 0 else 0.0
            q = info.path.q(j)
            p_frac = max(apd.path_fraction(q, info.path.p), 1.0 / self.cfg.H)
            self._apd(i, j, z, p_frac, led.link_break_count[j])
        for k in a.honest_responders:
            self._rep(i, k, RepEvent.DETECTION_REWARD)

    # ---------------------------------------------------------- allegations

    def _broadcast_allegation(self, packet: AllegationPacket) -> None:
        a = packet.accuser
        now = self.eq.now
        self.stats.allegations.append((now, packet.kind.value, a, packet.accused))
        process_allegation(self.nodes[a].ledger, packet, self.params)
        self._spend(a)
        dist = hop_distances(self.adj, a)
        for m in range(self.n):
            if m == a:
                continue
            hops = dist.get(m, self.cfg.H)
            self.eq.schedule(now + hops * self.delta, "allegation", a, m, packet)

    def _on_allegation(self, ev: SimEvent) -> None:
        m, packet = ev.dst, ev.payload
        node = self.nodes[m]
        self._spend(m)  # flooding relay
        before = {w: node.ledger.score(w) for w in (packet.accused, packet.accuser, *packet.witness_list)}
        outcome = process_allegation(node.ledger, packet, self.params)
        for w, old in before.items():
            if w == m:
                continue
            delta = node.ledger.score(w) - old
            if delta > 0:
                self.stats.rep_gain[w] = self.stats.rep_gain.get(w, 0.0) + delta
            elif delta < 0:
                self.stats.rep_loss[w] = self.stats.rep_loss.get(w, 0.0) - delta
        if outcome is AllegationOutcome.IGNORED:
            return
        target = packet.accused if outcome is AllegationOutcome.GUILTY else packet.accuser
        if target not in self.stats.blacklist_time:
            if all(target in self.nodes[x].ledger.network_blacklist for x in range(self.n) if x != target):
                self.stats.blacklist_time[target] = ev.time

    # ------------------------------------------------------------- attacks

    def _on_flood(self, ev: SimEvent) -> None:
        k, now = ev.src, ev.time
        node = self.nodes[k]
        self._acted(k, now)
        dest = int(self.behave_rng[k].integers(0, self.n - 1))
        dest += dest >= k
        self._send_rreq(k, dest, now, honest=False)
        nxt = now + 1.0 / node.strategy.flood_rate
        if nxt <= self.cfg.sim_time:
            self.eq.schedule(nxt, "flood", k)

    def _on_slander(self, ev: SimEvent) -> None:
        k, now = ev.src, ev.time
        node = self.nodes[k]
        if k not in self.stats.blacklist_time:
            victim = int(self.behave_rng[k].integers(0, self.n - 1))
            victim += victim >= k
            self._acted(k, now)
            self._broadcast_allegation(AllegationPacket(k, victim, AllegationKind.LINK, None, (), now))
        nxt = now + node.strategy.slander_interval
        if nxt <= self.cfg.sim_time:
            self.eq.schedule(nxt, "slander", k)

    def _request_collusion(self, j: int, victim: int, now: float) -> None:
        node = self.nodes[j]
        req = node.originator.create(MsgCode.COLLUSION_REQ, now, ("conceal", victim), None)
        self._spend(j)
        for k in map(int, np.flatnonzero(self.reach[j])):
            if k != victim:
                self.eq.schedule(now + self.delta, "collusion_req", j, k, req)

    def _on_collusion_req(self, ev: SimEvent) -> None:
        j, k, req = ev.src, ev.dst, ev.payload
        node = self.nodes[k]
        if j in node.ledger.network_blacklist:
            return
        if handle_collusion_request(node.strategy, j) is CollusionResponse.COMPLY:
            return
        self._broadcast_allegation(
            AllegationPacket(k, j, AllegationKind.COLLUSION, CollusionRequestCopy(req), (), ev.time)
        )

    # ------------------------------------------------------------- queries

    def network_blacklisted(self, j: int) -> bool:
        return all(j in self.nodes[m].ledger.network_blacklist for m in range(self.n) if m != j)

    def any_blacklist(self) -> tuple[int, int]:
        """Counts of (network, local-only) blacklist entries across all ledgers."""
        net = sum(len(n.ledger.network_blacklist) for n in self.nodes)
        loc = sum(len(n.ledger.local_blacklist - n.ledger.network_blacklist) for n in self.nodes)
        return net, loc
