"""Per-run outcomes and the four headline metrics.

Reputation and energy damage are kept in separate columns and never added
together.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..sim.world import World


@dataclass
class RunOutcome:
    """What a finished run leaves behind, reduced to per-node numbers."""

    selfish: tuple[int, ...]
    malicious: tuple[int, ...]
    profit: dict[int, float] = field(default_factory=dict)  # net reputation held, summed over observers
    rep_damage: dict[int, float] = field(default_factory=dict)  # attack-attributed reputation loss
    energy_damage: dict[int, float] = field(default_factory=dict)  # attack-attributed energy
    acted: frozenset[int] = frozenset()
    detected: frozenset[int] = frozenset()
    allegations: int = 0
    network_blacklists: int = 0
    local_blacklists: int = 0
    generated: int = 0
    delivered: int = 0
    events: int = 0
    trace_hash: str = ""
    seed: int = 0


def outcome_from_world(world: World, seed: int = 0) -> RunOutcome:
    selfish = tuple(n.id for n in world.nodes if not n.malicious)
    malicious = tuple(n.id for n in world.nodes if n.malicious)
    profit = {
        k: sum(world.nodes[o].ledger.score(k) for o in range(world.n) if o != k) for k in selfish
    }
    st = world.stats
    rep_damage = {k: st.forgone_reward.get(k, 0.0) for k in selfish}
    rep_damage.update({k: st.rep_loss.get(k, 0.0) for k in malicious})
    energy = {k: st.damage_energy.get(k, 0.0) for k in selfish}
    energy.update({k: st.attack_energy.get(k, 0.0) for k in malicious})
    net, loc = world.any_blacklist()
    return RunOutcome(
        selfish=selfish,
        malicious=malicious,
        profit=profit,
        rep_damage=rep_damage,
        energy_damage=energy,
        acted=frozenset(st.acted),
        detected=frozenset(k for k in st.acted if world.network_blacklisted(k)),
        allegations=len(st.allegations),
        network_blacklists=net,
        local_blacklists=loc,
        generated=st.generated,
        delivered=st.delivered,
        events=world.eq.processed,
        trace_hash=world.trace_hash,
        seed=seed,
    )


@dataclass
class MetricsReport:
    malicious_count: int
    rep_efficiency: float
    dmg_selfish: float
    dmg_malicious: float
    energy_dmg_selfish: float
    energy_dmg_malicious: float
    detection_rate_pct: Optional[float]
    act_mal: float
    mal_det: float
    allegations: float
    network_blacklists: float
    local_blacklists: float
    runs: list["MetricsReport"] = field(default_factory=list)
    seed: Optional[int] = None
    trace_hash: str = ""

    @property
    def paper_literal_pct(self) -> Optional[float]:
        """The literal correctness formula: zero means every attacker was caught."""
        if self.detection_rate_pct is None:
            return None
        return 100.0 - self.detection_rate_pct


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def detection_rate(act_mal: int, mal_det: int) -> Optional[float]:
    if act_mal == 0:
        return None
    return 100.0 * mal_det / act_mal


def compute_metrics(outcome: RunOutcome) -> MetricsReport:
    sel, mal = outcome.selfish, outcome.malicious
    return MetricsReport(
        malicious_count=len(mal),
        rep_efficiency=_mean([outcome.profit.get(k, 0.0) for k in sel]),
        dmg_selfish=_mean([outcome.rep_damage.get(k, 0.0) for k in sel]),
        dmg_malicious=_mean([outcome.rep_damage.get(k, 0.0) for k in mal]),
        energy_dmg_selfish=_mean([outcome.energy_damage.get(k, 0.0) for k in sel]),
        energy_dmg_malicious=_mean([outcome.energy_damage.get(k, 0.0) for k in mal]),
        detection_rate_pct=detection_rate(len(outcome.acted), len(outcome.detected & outcome.acted)),
        act_mal=len(outcome.acted),
        mal_det=len(outcome.detected & outcome.acted),
        allegations=outcome.allegations,
        network_blacklists=outcome.network_blacklists,
        local_blacklists=outcome.local_blacklists,
        seed=outcome.seed,
        trace_hash=outcome.trace_hash,
    )


def aggregate(rows: Sequence[MetricsReport]) -> MetricsReport:
    """Arithmetic mean over runs, folded in run order.

    Detection rate averages only the runs where some attacker acted, and is
    undefined when none did.
    """
    if not rows:
        raise ValueError("nothing to aggregate")
    rates = [r.detection_rate_pct for r in rows if r.detection_rate_pct is not None]
    return MetricsReport(
        malicious_count=rows[0].malicious_count,
        rep_efficiency=_mean([r.rep_efficiency for r in rows]),
        dmg_selfish=_mean([r.dmg_selfish for r in rows]),
        dmg_malicious=_mean([r.dmg_malicious for r in rows]),
        energy_dmg_selfish=_mean([r.energy_dmg_selfish for r in rows]),
        energy_dmg_malicious=_mean([r.energy_dmg_malicious for r in rows]),
        detection_rate_pct=_mean(rates) if rates else None,
        act_mal=_mean([r.act_mal for r in rows]),
        mal_det=_mean([r.mal_det for r in rows]),
        allegations=_mean([r.allegations for r in rows]),
        network_blacklists=_mean([r.network_blacklists for r in rows]),
        local_blacklists=_mean([r.local_blacklists for r in rows]),
        runs=list(rows),
    )
