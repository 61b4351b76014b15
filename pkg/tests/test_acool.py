"""Composition tests: scripted single-node flows and small end-to-end runs."""

import random

import pytest

from acool.aba import OracleAbba, ORACLE_ID
from acool.field_ecc import ecc_encode, params_for_message_bits
from acool.messages import (
    AbbaIn, AbbaOut, CorrectSymbol, NewSymbol, Ready, Si, Symbol,
)
from acool.protocol import BOTTOM, AcoolNode
from acool.simnet import SimConfig, run, scenario_split_input

P41 = params_for_message_bits(4, 1, 64)
W = b"m1-value"


def rows_for(w, params=P41):
    return [s.elems for s in ecc_encode(params, w)]


def fresh(node_id=1, **kw):
    return AcoolNode(node_id, P41, OracleAbba(node_id), **kw)


def sends_of_type(sends, typ):
    return [(d, m) for d, m in sends if isinstance(m, typ)]


def test_input_starts_first_instance_only():
    node = fresh()
    sends = node.input(W)
    syms = sends_of_type(sends, Symbol)
    assert len(syms) == 4 and all(m.inst == 1 for _, m in syms)
    assert len(syms) == len(sends)


def test_duplicate_input_ignored():
    node = fresh()
    node.input(W)
    assert node.input(b"other") == []
    assert node.w_input == W


def test_empty_input_ignored():
    node = fresh()
    assert node.input(b"") == []
    assert node.w_input is None


def test_new_symbols_decode_shared_input_and_start_second_instance():
    node = fresh()
    node.input(W)
    rows = rows_for(b"mB")
    sends = node.handle(2, NewSymbol(rows[1]))
    assert node.w2 is None and sends == []
    sends = node.handle(3, NewSymbol(rows[2]))   # k + t = 2 shares
    assert node.w2 == b"mB"
    syms = sends_of_type(sends, Symbol)
    assert len(syms) == 4 and all(m.inst == 2 for _, m in syms)


def test_new_symbol_garbage_tolerated_via_retry():
    node = fresh()
    node.input(W)
    rows = rows_for(b"mB")
    node.handle(4, NewSymbol((12345 % P41.q,) * P41.chunks))
    node.handle(2, NewSymbol(rows[1]))
    assert node.w2 is None                       # garbage blocked this attempt
    node.handle(3, NewSymbol(rows[2]))
    assert node.w2 == b"mB"


def test_new_symbol_after_decode_is_stored_not_redecoded():
    node = fresh()
    node.input(W)
    rows = rows_for(b"mB")
    node.handle(2, NewSymbol(rows[1]))
    node.handle(3, NewSymbol(rows[2]))
    attempts = node.oec_new.attempts
    node.handle(4, NewSymbol(rows[3]))
    assert node.oec_new.attempts == attempts and node.w2 == b"mB"


def test_duplicate_new_symbol_dropped():
    node = fresh()
    node.input(W)
    rows = rows_for(b"mB")
    node.handle(2, NewSymbol(rows[1]))
    node.handle(2, NewSymbol(rows_for(b"mC")[1]))
    assert node.oec_new.shares[2] == rows[1]


def test_harvest_from_phase1_success_peers_feeds_decoder():
    """Peers with a phase-1 success contribute their own symbols to the
    shared-input decode even without any NEWSYMBOL traffic."""
    node = fresh()
    node.input(b"other")
    rows = rows_for(W)
    for j in (2, 3):
        node.handle(j, Symbol(1, (rows[0], rows[j - 1])))
    assert not node.oec_new.shares
    node.handle(2, Si(1, 1, 1))
    node.handle(3, Si(1, 1, 1))                  # k + t = 2 harvested
    assert node.w2 == W and node.bua2.w == W


def test_second_instance_fed_from_own_input_on_phase2_success():
    node = fresh()
    node.input(W)
    rows = rows_for(W)
    # all four matching symbols, then unanimous phase-1 indicators
    for j in (1, 2, 3, 4):
        node.handle(j, Symbol(1, (rows[0], rows[j - 1])))
    for j in (1, 2, 3, 4):
        node.handle(j, Si(1, 1, 1))
    assert node.bua1.s2 == 1
    assert node.bua2.w == W                      # reused own input


def test_abba_gets_vote_from_second_instance():
    node = fresh()
    node.input(W)
    rows = rows_for(b"mB")
    node.handle(2, NewSymbol(rows[1]))
    node.handle(3, NewSymbol(rows[2]))
    sends = []
    for j in (1, 2, 3):
        sends += node.handle(j, Si(2, 2, 1))     # instance-2 phase-2 quorum
    assert node.bua2.vote == 1
    assert [(d, m) for d, m in sends if isinstance(m, AbbaIn)] == \
        [(ORACLE_ID, AbbaIn(1))]


def test_abba_gets_zero_from_first_instance():
    node = fresh()
    node.input(W)
    sends = []
    for j in (2, 3):
        sends += node.handle(j, Si(1, 2, 0))     # instance-1 phase-2 zeros
    assert node.bua1.vote == 0
    assert [(d, m) for d, m in sends if isinstance(m, AbbaIn)] == \
        [(ORACLE_ID, AbbaIn(0))]


def test_abba_output_broadcasts_ready_once():
    node = fresh()
    node.input(W)
    sends = node.handle(ORACLE_ID, AbbaOut(1))
    readies = sends_of_type(sends, Ready)
    assert len(readies) == 4 and all(m.bit == 1 for _, m in readies)
    assert node.handle(ORACLE_ID, AbbaOut(0)) == []


def test_ready_amplification_at_t_plus_one():
    node = fresh()
    node.input(W)
    assert node.handle(2, Ready(0)) == []
    sends = node.handle(3, Ready(0))
    readies = sends_of_type(sends, Ready)
    assert len(readies) == 4 and node.ready_sent == 0


def test_ready_decision_zero_terminates_bottom():
    node = fresh()
    node.input(W)
    for j in (2, 3, 4):
        node.handle(j, Ready(0))
    assert node.is_terminated() and node.poll_output() is BOTTOM


def test_ready_decision_requires_exactly_2t_plus_1():
    node = fresh()
    node.input(W)
    node.handle(2, Ready(1))
    node.handle(3, Ready(1))                     # 2t readies: not enough
    assert node.v_out is None
    node.handle(4, Ready(1))
    assert node.v_out == 1


def test_ready_decision_one_enters_phase_three():
    node = fresh()
    node.input(W)
    for j in (2, 3, 4):
        node.handle(j, Ready(1))
    assert node.ph3 and not node.is_terminated()


def test_first_ready_per_sender_counts():
    node = fresh()
    node.input(W)
    node.handle(2, Ready(0))
    node.handle(2, Ready(1))
    assert node.ready_from == {0: {2}, 1: set()}


def test_phase_three_fast_path_outputs_second_instance_message():
    node = fresh()
    node.input(W)
    rows = rows_for(W)
    node.handle(2, NewSymbol(rows[1]))
    node.handle(3, NewSymbol(rows[2]))            # feeds instance 2 with W
    for j in (1, 2, 3, 4):
        node.handle(j, Symbol(2, (rows[0], rows[j - 1])))
    for j in (1, 2, 3, 4):
        node.handle(j, Si(2, 1, 1))
    assert node.bua2.s2 == 1
    for j in (1, 2, 3):
        node.handle(j, Si(2, 2, 1))               # vote triple delivered
    for j in (2, 3, 4):
        node.handle(j, Ready(1))
    assert node.is_terminated() and node.poll_output() == W


def test_phase_three_calibration_path():
    """Without a phase-2 success, the node adopts the majority symbol of
    phase-2-successful peers, multicasts it, and decodes the final value."""
    node = fresh()
    node.input(b"other")                          # own input differs
    rows = rows_for(W)
    node.handle(2, NewSymbol(rows[1]))
    node.handle(3, NewSymbol(rows[2]))            # instance 2 runs on W
    # peers 2,3 ran instance 2 on W: deliver their symbols and indicators
    for j in (2, 3):
        node.handle(j, Symbol(2, (rows[0], rows[j - 1])))
        node.handle(j, Si(2, 2, 1))
    for j in (2, 3, 4):
        node.handle(j, Ready(1))
    assert node.ph3 and node.bua2.s2 is None and node.calibrated
    # own CORRECTSYMBOL loops back, then one more peer share decodes
    node.handle(1, CorrectSymbol(rows[0]))
    node.handle(4, CorrectSymbol(rows[3]))
    assert node.is_terminated() and node.poll_output() == W


def test_correct_symbol_before_phase_three_is_stored():
    node = fresh()
    node.input(W)
    rows = rows_for(W)
    node.handle(2, CorrectSymbol(rows[1]))
    assert 2 in node.oec_final.shares and not node.ph3


def test_correct_symbol_duplicates_dropped():
    node = fresh()
    node.input(W)
    rows = rows_for(W)
    node.handle(2, CorrectSymbol(rows[1]))
    node.handle(2, CorrectSymbol(rows_for(b"zz")[1]))
    assert node.oec_final.shares[2] == rows[1]


def test_harvest_from_phase2_success_peers_feeds_final_decode():
    node = fresh()
    node.input(W)
    rows = rows_for(W)
    node.handle(2, NewSymbol(rows[1]))
    node.handle(3, NewSymbol(rows[2]))           # instance 2 gains an input
    node.handle(2, Symbol(2, (rows[0], rows[1])))
    assert 2 not in node.oec_final.shares
    node.handle(2, Si(2, 2, 1))                  # peer 2 joins phase-2 ones
    assert node.oec_final.shares.get(2) == rows[1]


# -- end-to-end over the simulator ------------------------------------------


def test_fault_free_validity_all_protocolwide():
    cfg = SimConfig(n=4, t=1, seed=11, msg_len_bits=64)
    rep = run(cfg)
    assert rep.reason == "ok" and all(rep.checks.values())
    outs = {v["output"] for v in rep.outputs.values()}
    assert len(outs) == 1 and not any(v["bottom"] for v in rep.outputs.values())


def test_skip_brba_with_totality_oracle():
    cfg = SimConfig(n=4, t=1, seed=3, msg_len_bits=64, skip_brba=True)
    rep = run(cfg)
    assert rep.reason == "ok" and all(rep.checks.values())
    assert "READY" not in rep.metrics.bits_by_tag


def test_split_input_scenario_terminates_and_agrees():
    for n, t in ((4, 1), (7, 2)):
        cfg = scenario_split_input(n, t, msg_len_bits=64, seed=5, abba="coin")
        rep = run(cfg)
        assert rep.reason == "ok", (n, t, rep.reason)
        assert all(rep.checks.values())


def test_split_input_default_partition_sizes():
    cfg = scenario_split_input(4, 1, msg_len_bits=64)
    byz = cfg.byzantine_ids()
    assert len(byz) == 1 and cfg.adversary_targets == (1, 2)
    cfg = scenario_split_input(7, 2, msg_len_bits=64)
    assert len(cfg.byzantine_ids()) == 2 and cfg.adversary_targets == (1, 2, 3)


def test_split_input_invalid_partition_rejected():
    with pytest.raises(ValueError):
        scenario_split_input(4, 1, sizes=(1, 1, 1))


def test_legacy_wiring_stalls_on_split_input():
    cfg = scenario_split_input(7, 2, msg_len_bits=64, seed=5, abba="coin",
                               legacy_cool=True, event_cap=30_000)
    rep = run(cfg)
    assert rep.reason in ("deadlock", "cap")
    assert not any(v["terminated"] for v in rep.outputs.values())


def test_mixed_inputs_consistent_over_seeds():
    rng = random.Random(0)
    for seed in range(8):
        inputs = {i: (b"aa" if rng.random() < 0.5 else b"bb") for i in range(1, 8)}
        cfg = SimConfig(n=7, t=2, seed=seed, msg_len_bits=64, inputs=inputs,
                        adversary="equivocate_symbols", scheduler="adversary")
        rep = run(cfg)
        assert rep.checks["consistency"] and rep.checks["unique_agreement"]


def test_single_abba_instance_per_node():
    cfg = SimConfig(n=7, t=2, seed=2, msg_len_bits=64)
    rep = run(cfg)
    assert rep.metrics.abba_instances == 7
