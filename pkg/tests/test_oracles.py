"""Brute-force oracles checked against naive per-coordinate recomputation."""

import pytest
from hypothesis import given, settings, strategies as st

from erm_lab.instances import BitVector, generate, default_dimension, default_threshold
from erm_lab.oracles import dot, hamming, solve, solve_bhcp_raw, solve_ovp_raw

vec_words = st.integers(min_value=0, max_value=(1 << 12) - 1)


@given(vec_words, vec_words)
@settings(deadline=None)
def test_hamming_and_dot_match_coordinates(wa, wb):
    a, b = BitVector(12, wa), BitVector(12, wb)
    bits_a, bits_b = list(a), list(b)
    assert hamming(a, b) == sum(x != y for x, y in zip(bits_a, bits_b))
    assert dot(a, b) == sum(x & y for x, y in zip(bits_a, bits_b))


@given(st.lists(vec_words, min_size=1, max_size=8),
       st.lists(vec_words, min_size=1, max_size=8))
@settings(deadline=None, max_examples=100)
def test_ovp_oracle_exhaustive(wa, wb):
    A = [BitVector(12, w) for w in wa]
    B = [BitVector(12, w) for w in wb]
    verdict = solve_ovp_raw(A, B)
    expect = any(dot(a, b) == 0 for a in A for b in B)
    assert verdict.has_pair == expect
    if verdict.has_pair:
        i, j = verdict.witness
        assert dot(A[i], B[j]) == 0


@given(st.lists(vec_words, min_size=1, max_size=8),
       st.lists(vec_words, min_size=1, max_size=8),
       st.integers(min_value=2, max_value=12))
@settings(deadline=None, max_examples=100)
def test_bhcp_oracle_exhaustive(wa, wb, t):
    A = [BitVector(12, w) for w in wa]
    B = [BitVector(12, w) for w in wb]
    verdict = solve_bhcp_raw(A, B, t)
    dists = [hamming(a, b) for a in A for b in B]
    assert verdict.has_pair == (min(dists) < t)
    assert verdict.extremal_value == min(dists)


def test_solve_dispatches_on_kind():
    d = default_dimension(6)
    ovp = generate("OVP", 6, d, planted="yes", seed=1)
    bhcp = generate("BHCP", 6, d, t=default_threshold(d), planted="no", seed=1)
    assert solve(ovp).has_pair
    assert not solve(bhcp).has_pair
