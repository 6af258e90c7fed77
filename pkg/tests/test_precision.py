"""Interval arithmetic: enclosure soundness and rounding-direction checks."""

from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from erm_lab.precision import (DEFAULT_BITS, DomainError, Interval,
                               PrecisionError, exact_abs, exact_neg,
                               interval_exp, interval_ln, interval_pow_int,
                               interval_sqrt, interval_sum, precision_ladder)

rationals = st.fractions(min_value=-1000, max_value=1000,
                         max_denominator=10 ** 6)


def test_exact_contains_value():
    for q in (Fraction(1, 3), Fraction(-7, 11), Fraction(10) ** 30):
        iv = Interval.exact(q, 128)
        assert iv.contains(q)
        assert iv.lo <= iv.hi


def test_exact_neg_preserves_precision():
    # bare "-x" on an mpfr rounds to the 53-bit global context; the helper
    # must not
    x = gmpy2.context(precision=200).div(mpfr(1), mpfr(3))
    assert x.precision == 200
    y = exact_neg(x)
    assert y.precision == 200
    assert gmpy2.context(precision=200).add(x, y) == 0
    assert exact_abs(y) == x


def test_interval_neg_is_lossless():
    third = Interval.exact(Fraction(1, 3), 300)
    back = third.neg().neg()
    assert back.lo == third.lo and back.hi == third.hi
    assert third.neg().contains(Fraction(-1, 3))


@given(rationals, rationals)
@settings(max_examples=200, deadline=None)
def test_add_sub_mul_enclose(a, b):
    bits = 96
    ia, ib = Interval.exact(a, bits), Interval.exact(b, bits)
    assert ia.add(ib, bits).contains(a + b)
    assert ia.sub(ib, bits).contains(a - b)
    assert ia.mul(ib, bits).contains(a * b)


@given(rationals, rationals)
@settings(max_examples=200, deadline=None)
def test_div_encloses(a, b):
    if b == 0:
        return
    bits = 96
    q = Interval.exact(a, bits).div(Interval.exact(b, bits), bits)
    assert q.contains(Fraction(a) / b)


@given(st.fractions(min_value=-30, max_value=30, max_denominator=1000))
@settings(max_examples=100, deadline=None)
def test_exp_ln_roundtrip(x):
    bits = 128
    e = interval_exp(Interval.exact(x, bits), bits)
    assert e.lo > 0
    back = interval_ln(e, bits)
    assert back.contains(x)


@given(st.fractions(min_value=0, max_value=1000, max_denominator=1000))
@settings(max_examples=100, deadline=None)
def test_sqrt_encloses(x):
    bits = 128
    r = interval_sqrt(Interval.exact(x, bits), bits)
    sq = r.mul(r, bits)
    assert sq.contains(x)


@given(rationals, st.integers(min_value=0, max_value=6))
@settings(max_examples=100, deadline=None)
def test_pow_int_encloses(x, k):
    bits = 128
    p = interval_pow_int(Interval.exact(x, bits), k, bits)
    assert p.contains(Fraction(x) ** k)


@given(st.lists(rationals, min_size=1, max_size=30))
@settings(max_examples=100, deadline=None)
def test_interval_sum_encloses(xs):
    bits = 96
    s = interval_sum((Interval.exact(x, bits) for x in xs), bits)
    assert s.contains(sum(xs))


def test_width_shrinks_with_precision():
    widths = []
    for bits in (64, 128, 256):
        iv = interval_exp(Interval.exact(Fraction(-5), bits), bits)
        widths.append(iv.width())
    assert widths[0] > widths[1] > widths[2]


def test_ln_rejects_nonpositive():
    with pytest.raises(DomainError):
        interval_ln(Interval.exact(Fraction(-1), 64), 64)


def test_precision_ladder_doubles_and_stops():
    ladder = list(precision_ladder(100, cap=900))
    assert ladder == [100, 200, 400, 800, 900]
    # starting above the cap clamps to a single rung at the cap
    capped = list(precision_ladder(2 ** 22, cap=2 ** 20))
    assert capped == [2 ** 20]
    with pytest.raises(PrecisionError):
        next(precision_ladder(1))


def test_interval_requires_order():
    with pytest.raises(ValueError):
        Interval(mpfr(2), mpfr(1))


def test_hull_and_comparisons():
    a = Interval.exact(Fraction(1, 2), 64)
    b = Interval.exact(Fraction(3, 2), 64)
    h = a.hull(b)
    assert h.contains(Fraction(1, 2)) and h.contains(Fraction(3, 2))
    assert b.strictly_above(a)
    assert a.strictly_below(b)
    assert not a.overlaps(b)
