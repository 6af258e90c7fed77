"""Gaussian kernel evaluation and Gram-matrix properties, checked against
mpmath as an independent extended-precision oracle."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from erm_lab.instances import BitVector, generate, default_dimension
from erm_lab.kernels import (KernelParams, almost_identity_check, entry_sum,
                             gaussian_kernel, gram, kernel_of_sqdist,
                             off_diagonal_sup)
from erm_lab.precision import Interval


@given(st.integers(min_value=0, max_value=40),
       st.integers(min_value=2, max_value=32))
@settings(deadline=None, max_examples=60)
def test_kernel_matches_mpmath(sq, n_ref):
    params = KernelParams.for_instance_size(n_ref)
    iv = kernel_of_sqdist(sq, params, 256)
    with mpmath.workdps(120):
        C = mpmath.mpf(params.multiplier.numerator) / params.multiplier.denominator \
            * mpmath.log(params.n_ref)
        ref = mpmath.exp(-C * sq)
        lo = mpmath.mpf(iv.lo.digits(10, 60)[0]) * mpmath.mpf(10) ** (iv.lo.digits(10, 60)[1] - 60)
        hi = mpmath.mpf(iv.hi.digits(10, 60)[0]) * mpmath.mpf(10) ** (iv.hi.digits(10, 60)[1] - 60)
        # the 60-digit decimal renderings bracket the endpoints loosely; allow
        # one ulp of decimal slop on each side
        slop = mpmath.mpf(10) ** (iv.hi.digits(10, 60)[1] - 58)
        assert lo - slop <= ref <= hi + slop


def test_kernel_at_zero_distance_is_one():
    params = KernelParams.for_instance_size(8)
    iv = kernel_of_sqdist(0, params, 128)
    assert iv.contains(Fraction(1))


def test_kernel_decreasing_in_distance():
    params = KernelParams.for_instance_size(8)
    prev = None
    for sq in range(6):
        iv = kernel_of_sqdist(sq, params, 192)
        if prev is not None:
            assert iv.hi < prev.lo
        prev = iv


def test_gram_symmetry_and_unit_diagonal():
    inst = generate("OVP", 6, default_dimension(6), planted="no", seed=5)
    K = gram(inst.A, None, KernelParams.for_instance_size(6), 192)
    for i in range(6):
        assert K.entry(i, i).contains(Fraction(1))
        for j in range(6):
            a, b = K.entry(i, j), K.entry(j, i)
            assert a.lo == b.lo and a.hi == b.hi


def test_entry_sum_matches_manual():
    inst = generate("OVP", 5, default_dimension(5), planted="no", seed=9)
    params = KernelParams.for_instance_size(5)
    K = gram(inst.A, inst.B, params, 192)
    total = entry_sum(K, 192)
    acc = Interval.zero(192)
    for i in range(5):
        for j in range(5):
            acc = acc.add(K.entry(i, j), 192)
    assert total.overlaps(acc)


def test_off_diagonal_sup_and_almost_identity():
    # distinct points at C = 100 ln n push off-diagonals far below any
    # polynomial threshold
    inst = generate("BHCP", 6, default_dimension(6), t=2, planted="no", seed=13)
    params = KernelParams.for_instance_size(6)
    K = gram(inst.A, None, params, 256)
    sup = off_diagonal_sup(K)
    eps = kernel_of_sqdist(1, params, 256)  # exp(-C), the largest possible
    assert sup <= eps.hi
    assert almost_identity_check(K, eps)


def test_kernel_params_validation():
    with pytest.raises(Exception):
        KernelParams(n_ref=1)
    with pytest.raises(Exception):
        KernelParams(multiplier=Fraction(0))


def test_gaussian_kernel_uses_hamming():
    a, b = BitVector(6, 0b101010), BitVector(6, 0b100110)
    params = KernelParams.for_instance_size(4)
    via_vec = gaussian_kernel(a, b, params, 160)
    via_sq = kernel_of_sqdist(2, params, 160)
    assert via_vec.lo == via_sq.lo and via_vec.hi == via_sq.hi
