import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from manetrep.apd import correctness_link
from manetrep.net.hello import HelloRecord
from manetrep.protocol.detection import (
    AllegationKind,
    AllegationOutcome,
    AllegationPacket,
    BicastCopyPair,
    CollusionRequestCopy,
    DelayVerdict,
    ForwardState,
    PathRecord,
    ProtocolParams,
    RreqBundle,
    RreqLimiter,
    WitnessVerdict,
    assess_link_breakage,
    compute_gamma,
    detect_delay,
    expected_hellos,
    on_witness_copy,
    process_allegation,
    send_schedule,
    verify_via_alternate_path,
    witness_eligible,
)
from manetrep.protocol.messages import (
    PACKET_BYTES,
    ForwardCopy,
    MaskingError,
    Message,
    MsgCode,
    OriginRegistry,
    SentCopy,
)
from manetrep.reputation import RepEvent, ReputationLedger, init_peer

REG = OriginRegistry()
NODES = {k: REG.issue(k) for k in range(10)}


# --- messages -----------------------------------------------------------------


def test_code_table():
    names = [
        "DATA", "ACK", "HELLO", "HELLO_ACK", "RREQ", "RREP", "HELLO_ENQ", "HELLO_REPLY",
        "ALLEGATION_LINK", "ALLEGATION_DELAY", "ALLEGATION_FLOOD", "ALLEGATION_COLLUSION",
        "COLLUSION_REQ", "BICAST_COPY_RETURN", "DEPARTURE_NOTICE",
    ]  # fmt: skip
    assert [c.name for c in MsgCode] == names
    assert [int(c) for c in MsgCode] == list(range(15))


def test_every_packet_is_512_bytes():
    m = NODES[1].create(MsgCode.HELLO, 0.0)
    assert m.wire_bytes == PACKET_BYTES == 512


def test_origin_is_stamped_and_immutable():
    m = NODES[3].create(MsgCode.DATA, 12.5, payload="x")
    assert (m.origin_id, m.timestamp) == (3, 12.5)
    with pytest.raises(dataclasses.FrozenInstanceError):
        m.origin_id = 4


def test_messages_cannot_be_forged_directly():
    with pytest.raises(MaskingError):
        Message(MsgCode.DATA, 4, 0.0, 1)
    m = NODES[3].create(MsgCode.DATA, 0.0)
    with pytest.raises(MaskingError):
        dataclasses.replace(m, origin_id=4, _stamp=None)


def test_originator_issued_once_per_node():
    reg = OriginRegistry()
    reg.issue(1)
    with pytest.raises(MaskingError):
        reg.issue(1)


def test_message_ids_unique():
    ids = {NODES[k % 10].create(MsgCode.DATA, 0.0).msg_id for k in range(100)}
    assert len(ids) == 100


# --- forwarding timers ----------------------------------------------------------


def test_send_schedule_without_ack():
    sends, investigate = send_schedule(100.0, 10.0)
    assert sends == [100.0, 110.0, 120.0] and investigate == 130.0


def test_forward_state_deadline_tracks_last_send():
    st_ = ForwardState(NODES[0].create(MsgCode.DATA, 0.0), receiver=1, t1=5.0, tau_prime=10.0)
    assert st_.deadline == 15.0
    st_.send_times += [5.0, 15.0]
    assert st_.deadline == 25.0 and st_.tlast == 15.0


@pytest.mark.parametrize(
    "n, m, tau, tp, want",
    [(2, [5, 5], 1.0, 10.0, 71.0), (0, [], 1.0, 10.0, 1.0), (1, [2], 1.0, 10.0, 33.0)],
)
def test_gamma(n, m, tau, tp, want):
    assert compute_gamma(n, m, tau, tp) == pytest.approx(want)


def test_path_record():
    p = PathRecord(0, 9, (3, 4, 5))
    assert p.p == 5 and p.nodes == (0, 3, 4, 5, 9)
    assert [p.q(r) for r in p.routers] == [1, 2, 3]
    assert p.successor(4) == 5 and p.predecessor(4) == 3


# --- witnesses ------------------------------------------------------------------


def _reach(edges, n=4):
    r = [[False] * n for _ in range(n)]
    for a, b in edges:
        r[a][b] = True
    return r


def test_witness_eligibility():
    i, j, l = 0, 1, 2
    ok = _reach([(0, 1), (1, 2), (2, 1), (2, 0)])
    assert witness_eligible(ok, i, j, l)
    # predecessor can overhear j directly
    assert not witness_eligible(_reach([(0, 1), (1, 0), (1, 2), (2, 1), (2, 0)]), i, j, l)
    # witness outside N(j)
    assert not witness_eligible(_reach([(0, 1), (2, 1), (2, 0)]), i, j, l)
    assert not witness_eligible(ok, i, j, j)


def test_witness_copy_comparison():
    m = NODES[0].create(MsgCode.DATA, 1.0, payload=b"abc")
    other = NODES[0].create(MsgCode.DATA, 1.0, payload=b"abd")
    assert on_witness_copy(m, m, True) is WitnessVerdict.CONFIRMED
    assert on_witness_copy(m, other, True) is WitnessVerdict.NOT_CONFIRMED
    assert on_witness_copy(m, m, False) is WitnessVerdict.IGNORED


# --- link breakage -----------------------------------------------------------------


def _hellos(sender, times, pos=(50.0, 0.0), radio=200.0):
    return [HelloRecord(sender, pos, t, radio, 6.0) for t in times]


def _assess(replies, rule="pseudocode", suspect_pos=(50.0, 0.0), responder_xy=(60.0, 0.0)):
    return assess_link_breakage(
        investigator=0,
        suspect=1,
        t1=100.0,
        tau_prime=10.0,
        suspect_hello_interval=6.0,
        suspect_range=200.0,
        investigator_range=100.0,
        replies=replies,
        investigator_position=lambda t: (0.0, 0.0),
        responder_position=lambda k, t: responder_xy,
        rule=rule,
    )


T5 = [101.0, 107.0, 113.0, 119.0, 125.0]


def test_expected_hellos():
    assert expected_hellos(10.0, 6.0) == 5
    assert expected_hellos(10.0, 10.0) == 3
    assert expected_hellos(10.0, 7.0) == 4


@pytest.mark.parametrize("rule", ["pseudocode", "prose"])
def test_full_coverage_blacklists(rule):
    a = _assess({2: _hellos(1, T5), 3: _hellos(1, T5)}, rule)
    assert (a.y, a.x_collected, a.x_in_range) == (5, 5, 5)
    assert a.blacklist and a.concealers == () and a.honest_responders == (2, 3)


def test_partial_coverage_goes_to_penalty_controller():
    # three HELLOs collected, two of them place the suspect inside the investigator's range
    recs = _hellos(1, T5[:2]) + _hellos(1, T5[2:3], pos=(150.0, 0.0))
    a = _assess({2: recs}, "pseudocode")
    assert (a.x_collected, a.x_in_range) == (3, 2)
    assert not a.blacklist
    # 1 - (1 - 2/4)(1 - 3/6)
    assert correctness_link(a.x_in_range, a.x_collected, a.y) == pytest.approx(0.75)


def test_concealing_responder_is_exposed():
    a = _assess({2: _hellos(1, T5[:4]), 3: _hellos(1, T5)})
    assert a.concealers == (2,)
    assert a.honest_responders == (3,)


def test_missing_hello_out_of_reach_is_not_concealment():
    a = _assess({2: _hellos(1, T5[:4]), 3: _hellos(1, T5)}, responder_xy=(900.0, 0.0))
    assert a.concealers == ()


def test_empty_reply_is_not_concealment():
    a = _assess({2: [], 3: []})
    assert a.concealers == () and not a.blacklist and a.x_collected == 0


def test_hellos_outside_window_ignored():
    a = _assess({2: _hellos(1, [95.0, *T5, 130.0])})
    assert a.x_collected == 5


# --- delay ------------------------------------------------------------------------


def test_delay_over_threshold_alleges():
    assert detect_delay(0.0, 40.0, 5, 1.0, 10.0) is DelayVerdict.ALLEGE


def test_delay_below_threshold_is_suspect():
    assert detect_delay(0.0, 20.0, 5, 1.0, 10.0) is DelayVerdict.SUSPECT


def test_delay_at_threshold_is_not_an_attack():
    assert detect_delay(0.0, 34.0, 5, 1.0, 10.0) is DelayVerdict.SUSPECT


def test_prompt_forward_after_receipt_is_fine():
    assert detect_delay(0.0, 12.0, 5, 1.0, 10.0, t_receipt=10.5) is DelayVerdict.OK


def test_pseudocode_delay_rule_uses_last_send():
    assert detect_delay(0.0, 25.0, 5, 1.0, 10.0, tlast=20.0, rule="pseudocode") is DelayVerdict.ALLEGE
    assert detect_delay(0.0, 23.0, 5, 1.0, 10.0, tlast=20.0, rule="pseudocode") is DelayVerdict.OK


# --- alternate path -------------------------------------------------------------------


def test_alternate_path_outcomes():
    assert verify_via_alternate_path(True, True, 0, 5) == (RepEvent.ACK_CONFIRMED_FORWARD, 0)
    assert verify_via_alternate_path(True, False, 0, 5) == (RepEvent.SET_MIN, 0)
    assert verify_via_alternate_path(False, None, 3, 5) == (None, 4)
    assert verify_via_alternate_path(False, None, 4, 5) == (RepEvent.SET_MIN, 5)


# --- route-request limiting --------------------------------------------------------------


def _rreq(t, who=7):
    return NODES[who].create(MsgCode.RREQ, t)


def test_eta_requests_accepted():
    lim = RreqLimiter(5)
    assert all(lim.observe(7, _rreq(t), t) is None for t in (0.0, 0.2, 0.4, 0.6, 0.8))
    assert lim.count(7) == 5


def test_sixth_request_inside_window_produces_proof():
    lim = RreqLimiter(5)
    for t in (0.0, 0.2, 0.4, 0.6, 0.8):
        lim.observe(7, _rreq(t), t)
    bundle = lim.observe(7, _rreq(0.9), 0.9)
    assert isinstance(bundle, RreqBundle) and len(bundle.requests) == 6


def test_window_resets_after_one_second():
    lim = RreqLimiter(5)
    for t in (0.0, 0.2, 0.4, 0.6, 0.8):
        lim.observe(7, _rreq(t), t)
    assert lim.observe(7, _rreq(1.1), 1.1) is None
    assert lim.count(7) == 1


@given(st.lists(st.floats(0, 0.001), min_size=1, max_size=30))
def test_limiter_count_never_exceeds_eta_plus_one(gaps):
    lim = RreqLimiter(5)
    t = 0.0
    for g in gaps:
        t += g
        lim.observe(7, _rreq(t), t)
        assert lim.count(7) <= 6


# --- allegations ------------------------------------------------------------------------


PARAMS = ProtocolParams(tau=1.0, tau_prime=10.0, eta=5)


def _ledger(me=9):
    return ReputationLedger(observer=me, phi_size=100)


def test_valid_flood_proof_blacklists_requester():
    bundle = RreqBundle(tuple(_rreq(0.1 * k) for k in range(6)))
    led = _ledger()
    pkt = AllegationPacket(2, 7, AllegationKind.FLOOD, bundle, (), 1.0)
    assert process_allegation(led, pkt, PARAMS) is AllegationOutcome.GUILTY
    assert 7 in led.network_blacklist and led.score(7) == -100
    assert led.score(2) == 100


def test_short_flood_proof_blacklists_accuser():
    bundle = RreqBundle(tuple(_rreq(0.1 * k) for k in range(4)))
    led = _ledger()
    pkt = AllegationPacket(2, 7, AllegationKind.FLOOD, bundle, (), 1.0)
    assert process_allegation(led, pkt, PARAMS) is AllegationOutcome.SLANDER
    assert 2 in led.network_blacklist and 7 not in led.network_blacklist


def test_flood_proof_spanning_over_a_second_is_rejected():
    bundle = RreqBundle(tuple(_rreq(0.3 * k) for k in range(6)))
    pkt = AllegationPacket(2, 7, AllegationKind.FLOOD, bundle, (), 2.0)
    assert process_allegation(_ledger(), pkt, PARAMS) is AllegationOutcome.SLANDER


def test_link_proof_rewards_accuser_and_witnesses():
    a = _assess({2: _hellos(1, T5), 3: _hellos(1, T5)})
    pkt = AllegationPacket(0, 1, AllegationKind.LINK, a.bundle, a.honest_responders, 130.0)
    led = _ledger()
    assert process_allegation(led, pkt, ProtocolParams()) is AllegationOutcome.GUILTY
    assert 1 in led.network_blacklist
    assert led.score(0) == led.score(2) == led.score(3) == 100


def test_proofless_allegation_never_hurts_the_accused():
    led = _ledger()
    init_peer(led, 4)
    led.scores[4] = 12.0
    pkt = AllegationPacket(5, 4, AllegationKind.LINK, None, (), 0.0)
    assert process_allegation(led, pkt, PARAMS) is AllegationOutcome.SLANDER
    assert led.score(4) == 12.0 and 5 in led.network_blacklist


def test_mismatched_proof_kind_is_slander():
    bundle = RreqBundle(tuple(_rreq(0.1 * k) for k in range(6)))
    pkt = AllegationPacket(2, 7, AllegationKind.DELAY, bundle, (), 1.0)
    assert process_allegation(_ledger(), pkt, PARAMS) is AllegationOutcome.SLANDER


def test_allegations_from_blacklisted_accusers_are_ignored():
    led = _ledger()
    process_allegation(led, AllegationPacket(5, 4, AllegationKind.LINK, None, (), 0.0), PARAMS)
    bundle = RreqBundle(tuple(_rreq(0.1 * k) for k in range(6)))
    out = process_allegation(led, AllegationPacket(5, 7, AllegationKind.FLOOD, bundle, (), 1.0), PARAMS)
    assert out is AllegationOutcome.IGNORED and 7 not in led.network_blacklist


def _delay_proof(t_fwd):
    own = SentCopy(42, 2, 3, 0.0)
    succ = ForwardCopy(42, 3, 2, t_fwd, 5)
    return BicastCopyPair(own, 0.0, succ)


def test_delay_proof_checked_against_threshold():
    led = _ledger()
    pkt = AllegationPacket(2, 3, AllegationKind.DELAY, _delay_proof(40.0), (), 40.0)
    assert process_allegation(led, pkt, PARAMS) is AllegationOutcome.GUILTY
    pkt = AllegationPacket(2, 3, AllegationKind.DELAY, _delay_proof(30.0), (), 30.0)
    assert process_allegation(_ledger(), pkt, PARAMS) is AllegationOutcome.SLANDER


def test_delay_proof_must_name_the_forwarder():
    pkt = AllegationPacket(2, 4, AllegationKind.DELAY, _delay_proof(40.0), (), 40.0)
    assert process_allegation(_ledger(), pkt, PARAMS) is AllegationOutcome.SLANDER


def test_collusion_request_copy_convicts_the_requester():
    req = NODES[6].create(MsgCode.COLLUSION_REQ, 3.0)
    led = _ledger()
    pkt = AllegationPacket(8, 6, AllegationKind.COLLUSION, CollusionRequestCopy(req), (), 3.0)
    assert process_allegation(led, pkt, PARAMS) is AllegationOutcome.GUILTY
    assert 6 in led.network_blacklist
    # the request names its real origin, so it cannot be pinned on someone else
    pkt = AllegationPacket(8, 5, AllegationKind.COLLUSION, CollusionRequestCopy(req), (), 3.0)
    assert process_allegation(_ledger(), pkt, PARAMS) is AllegationOutcome.SLANDER


def test_receiver_never_blacklists_itself():
    bundle = RreqBundle(tuple(_rreq(0.1 * k) for k in range(6)))
    led = _ledger(me=7)
    process_allegation(led, AllegationPacket(2, 7, AllegationKind.FLOOD, bundle, (), 1.0), PARAMS)
    assert 7 not in led.network_blacklist
