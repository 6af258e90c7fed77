"""Instance generation, normalization, and serialization."""

import json

import pytest
from hypothesis import given, settings, strategies as st

from erm_lab.instances import (BitVector, InstanceKind, ValidationError,
                               VectorPairInstance, default_dimension,
                               default_threshold, generate,
                               instance_from_dict, instance_to_dict, normalize)
from erm_lab.oracles import dot, hamming, solve


def test_bitvector_basics():
    v = BitVector(8, 0b10110010)
    assert v.ones() == 4
    assert list(v) == [0, 1, 0, 0, 1, 1, 0, 1]
    with pytest.raises(ValidationError):
        BitVector(4, 0b10000)


@given(st.integers(min_value=2, max_value=64))
@settings(deadline=None)
def test_default_dimension_superlogarithmic(n):
    d = default_dimension(n)
    assert d >= 4
    assert default_threshold(d) >= 2


@pytest.mark.parametrize("kind", ["OVP", "BHCP"])
@pytest.mark.parametrize("planted", ["yes", "no"])
def test_planted_ground_truth(kind, planted):
    for seed in range(10):
        n = 4 + seed
        d = default_dimension(n)
        t = default_threshold(d) if kind == "BHCP" else None
        inst = generate(kind, n, d, t=t, planted=planted, seed=seed)
        verdict = solve(inst)
        assert verdict.has_pair == (planted == "yes")
        assert inst.n == n and inst.m == n and inst.d == d


def test_planted_yes_witness_is_real():
    inst = generate("OVP", 8, 9, planted="yes", seed=3)
    verdict = solve(inst)
    i, j = verdict.witness
    assert dot(inst.A[i], inst.B[j]) == 0

    d = default_dimension(8)
    binst = generate("BHCP", 8, d, t=default_threshold(d), planted="yes", seed=3)
    bverdict = solve(binst)
    i, j = bverdict.witness
    assert hamming(binst.A[i], binst.B[j]) < binst.t


def test_normalize_preserves_dots_and_weights():
    inst = generate("OVP", 10, 12, planted="no", seed=11)
    norm = normalize(inst)
    assert norm.d == 2 * inst.d
    assert len({b.ones() for b in norm.B}) == 1
    for a, na in zip(inst.A, norm.A):
        for b, nb in zip(inst.B, norm.B):
            assert dot(a, b) == dot(na, nb)


def test_normalize_rejects_duplicates():
    v = BitVector(4, 0b0101)
    inst = VectorPairInstance(kind=InstanceKind.OVP, A=(v,), B=(v, v), d=4)
    with pytest.raises(ValidationError):
        normalize(inst)


def test_bhcp_requires_threshold():
    v = BitVector(4, 0b0101)
    with pytest.raises(ValidationError):
        VectorPairInstance(kind=InstanceKind.BHCP, A=(v,), B=(v,), d=4)


def test_serialization_roundtrip():
    d = default_dimension(7)
    inst = generate("BHCP", 7, d, t=default_threshold(d), planted="yes", seed=2)
    data = json.loads(json.dumps(instance_to_dict(inst)))
    back = instance_from_dict(data)
    assert back == inst


def test_generation_is_seed_deterministic():
    a = generate("OVP", 9, 10, planted="random", seed=42)
    b = generate("OVP", 9, 10, planted="random", seed=42)
    assert a == b
    c = generate("OVP", 9, 10, planted="random", seed=43)
    assert a != c
