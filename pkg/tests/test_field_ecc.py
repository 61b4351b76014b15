"""Codec and online-error-correction tests.

Expected values come from independent oracles: hand polynomial
arithmetic over GF(7) and brute-force minimum-distance search over all
q^k candidate polynomials.
"""

import random

import pytest

from acool.field_ecc import (
    CodeParams, DecodeFailure, MessageTooLong, OecAccumulator,
    ResilienceViolation, SymbolShare, derive_params, ecc_decode, ecc_encode,
    encode_elements, pack_message, params_for_message_bits, share_from_bytes,
    share_to_bytes, unpack_message,
)

GF7 = CodeParams(n=6, t=1, k=2, q=7, chunks=1)


def brute_force_decode(params, shares):
    """Oracle: scan every q^k polynomial for the unique nearest codeword."""
    n, k, q = params.n, params.k, params.q
    xs = sorted(shares)
    m = len(xs)
    e_max = (m - k) // 2
    best = None
    for code in range(q ** k):
        coeffs = [(code // q ** i) % q for i in range(k)]
        dist = 0
        for x in xs:
            val = 0
            for c in reversed(coeffs):
                val = (val * x + c) % q
            if (val,) != tuple(shares[x]):
                dist += 1
        if dist <= e_max:
            if best is not None:
                return None  # not unique
            best = coeffs
    return best


def test_derive_params_min_system():
    p = derive_params(4, 1, 8)
    assert (p.k, p.q, p.chunks, p.symbol_bits) == (1, 257, 1, 9)


def test_derive_params_k_floor():
    p = derive_params(31, 10, 80)
    assert p.k == 3 and p.q == 257


def test_derive_params_resilience():
    with pytest.raises(ResilienceViolation):
        derive_params(3, 1, 8)


def test_field_size_tracks_n():
    assert derive_params(400, 100, 64).q == 401


def test_constant_code_shares_all_equal():
    params = params_for_message_bits(4, 1, 16)
    assert params.k == 1
    shares = ecc_encode(params, b"ab")
    assert len(shares) == 4
    assert len({s.elems for s in shares}) == 1


def test_gf7_encode_matches_hand_values():
    # p(x) = 3 + 5x over GF(7): p(1..6) = 1, 6, 4, 2, 0, 5
    rows = encode_elements(GF7, [3, 5])
    assert [r[0] for r in rows] == [1, 6, 4, 2, 0, 5]


def test_gf7_two_errors_recovered():
    rows = encode_elements(GF7, [3, 5])
    shares = {i + 1: rows[i] for i in range(6)}
    shares[2] = ((shares[2][0] + 3) % 7,)
    shares[5] = ((shares[5][0] + 1) % 7,)
    xs = sorted(shares)
    from acool.field_ecc import _decode_chunk

    got = _decode_chunk(xs, [shares[x][0] for x in xs], 2, 7)
    assert got == [3, 5]
    assert brute_force_decode(GF7, shares) == [3, 5]


def test_gf7_oracle_agreement_sampled():
    from acool.field_ecc import _decode_chunk

    rng = random.Random(7)
    for _ in range(300):
        coeffs = [rng.randrange(7), rng.randrange(7)]
        rows = encode_elements(GF7, coeffs)
        shares = {i + 1: rows[i] for i in range(6)}
        for pos in rng.sample(range(1, 7), rng.randrange(3)):
            shares[pos] = ((shares[pos][0] + rng.randrange(1, 7)) % 7,)
        expect = brute_force_decode(GF7, shares)
        xs = sorted(shares)
        try:
            got = _decode_chunk(xs, [shares[x][0] for x in xs], 2, 7)
        except DecodeFailure:
            got = None
        assert got == expect


def test_roundtrip_with_corruption():
    rng = random.Random(11)
    for n, t in ((4, 1), (7, 2), (13, 4)):
        params = params_for_message_bits(n, t, 128)
        msg = bytes(rng.randrange(256) for _ in range(16))
        shares = {s.index: s.elems for s in ecc_encode(params, msg)}
        e = (n - params.k) // 2
        for idx in rng.sample(sorted(shares), min(e, t)):
            shares[idx] = tuple(rng.randrange(params.q) for _ in range(params.chunks))
        assert ecc_decode(params, shares) == msg


def test_decode_failure_beyond_radius():
    params = params_for_message_bits(4, 1, 16)
    msg = b"xy"
    shares = {s.index: s.elems for s in ecc_encode(params, msg)}
    picked = {1: shares[1], 2: tuple((e + 1) % params.q for e in shares[2])}
    with pytest.raises(DecodeFailure):
        ecc_decode(params, picked)


def test_message_too_long():
    params = derive_params(4, 1, 8)   # capacity 8 bits < frame alone
    with pytest.raises(MessageTooLong):
        ecc_encode(params, b"a")


def test_pack_unpack_roundtrip():
    rng = random.Random(3)
    for _ in range(50):
        n, t = 7, 2
        params = params_for_message_bits(n, t, 256)
        msg = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 33)))
        assert unpack_message(params, pack_message(params, msg)) == msg


def test_oec_returns_at_threshold():
    params = params_for_message_bits(7, 2, 64)
    msg = b"payload!"
    shares = ecc_encode(params, msg)
    acc = OecAccumulator(params)
    got = None
    for i, s in enumerate(shares):
        got = acc.submit(s.index, s.elems)
        if got is not None:
            assert i + 1 == params.oec_threshold
            break
    assert got == msg and acc.done and acc.attempts == 1


def test_oec_below_threshold_returns_nothing():
    params = params_for_message_bits(7, 2, 64)
    shares = ecc_encode(params, b"payload!")
    acc = OecAccumulator(params)
    for s in shares[: params.oec_threshold - 1]:
        assert acc.submit(s.index, s.elems) is None
    assert not acc.done


def test_oec_duplicate_ignored():
    params = params_for_message_bits(7, 2, 64)
    shares = ecc_encode(params, b"payload!")
    acc = OecAccumulator(params)
    acc.submit(1, shares[0].elems)
    acc.submit(1, (0,) * params.chunks)
    assert acc.duplicates == 1 and acc.shares[1] == shares[0].elems


def test_oec_with_garbage_recovers_within_t_retries():
    rng = random.Random(5)
    params = params_for_message_bits(7, 2, 64)
    msg = b"payload!"
    good = ecc_encode(params, msg)
    for _ in range(100):
        order = list(range(1, 8))
        rng.shuffle(order)
        bad = set(rng.sample(order, 2))
        acc = OecAccumulator(params)
        got = None
        for idx in order:
            elems = (tuple(rng.randrange(params.q) for _ in range(params.chunks))
                     if idx in bad else good[idx - 1].elems)
            got = acc.submit(idx, elems)
            if got is not None:
                break
        assert got == msg
        assert acc.attempts <= params.t + 1


def test_oec_match_check_blocks_minority_decode():
    # Accepting requires k+t stored shares to match; garbage cannot fake it.
    params = params_for_message_bits(7, 2, 64)
    rng = random.Random(9)
    acc = OecAccumulator(params)
    for idx in range(1, 4):
        acc.submit(idx, tuple(rng.randrange(params.q) for _ in range(params.chunks)))
    assert not acc.done


def test_share_serialization_roundtrip():
    share = SymbolShare(3, (1, 70000, 256))
    assert share_from_bytes(share_to_bytes(share)) == share
    assert len(share_to_bytes(share)) == 2 + 4 * 3


def test_determinism():
    params = params_for_message_bits(7, 2, 64)
    msg = b"payload!"
    a = [s.elems for s in ecc_encode(params, msg)]
    b = [s.elems for s in ecc_encode(params, msg)]
    assert a == b
