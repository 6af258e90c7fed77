"""Hard/soft-margin SVM reduction: geometry, solver certificates, and
distinguisher agreement with the brute-force oracle."""

from fractions import Fraction

import pytest
from gmpy2 import mpfr

from erm_lab.instances import (BitVector, generate, default_dimension,
                               default_threshold)
from erm_lab.kernels import KernelParams
from erm_lab.oracles import hamming, solve
from erm_lab.svm_reduction import (ParameterError, SignedPoint, SolverError,
                                   SvmInstance, build_bias_instance,
                                   build_three_svms, feasible_alpha,
                                   pad_length, signed_sqdist,
                                   soft_margin_distinguisher, solve_dual,
                                   solve_bias_reduced, solve_equality_reference,
                                   start_bits_for, svm_bias_distinguisher,
                                   svm_distinguisher, _q_matrix, _signed_gram)
from erm_lab.verdict import Answer

BITS = 256


def _bhcp(n, planted, seed):
    d = default_dimension(n)
    return generate("BHCP", n, d, t=default_threshold(d), planted=planted, seed=seed)


def test_signed_sqdist_matches_explicit_coordinates():
    a = SignedPoint(BitVector(5, 0b10110), 1)
    b = SignedPoint(BitVector(5, 0b01100), -1)
    for pad in (0, 3):
        pa, pb = a.coordinates(pad), b.coordinates(pad)
        explicit = sum((x - y) ** 2 for x, y in zip(pa, pb))
        assert signed_sqdist(a, b, pad) == explicit
        assert signed_sqdist(a, a, pad) == 0


def test_signed_sqdist_same_sign_is_hamming():
    a = SignedPoint(BitVector(6, 0b101010), 1)
    b = SignedPoint(BitVector(6, 0b100110), 1)
    assert signed_sqdist(a, b) == hamming(a.vec, b.vec)


def test_build_three_svms_shapes():
    inst = _bhcp(5, "no", 0)
    s1, s2, s3 = build_three_svms(inst, KernelParams.for_instance_size(5))
    assert s1.n_points == 5 and s2.n_points == 5 and s3.n_points == 10
    assert all(l == 1 for l in s1.labels)
    assert set(s3.labels) == {1, -1}


def test_solve_dual_certificates():
    inst = _bhcp(5, "no", 1)
    params = KernelParams.for_instance_size(5)
    svm = build_three_svms(inst, params)[0]
    tol = mpfr("1e-40")
    sol = solve_dual(svm, tol, BITS)
    assert sol.kkt_residual.hi <= tol
    # dual optimum interval must be nonempty and the primal hull consistent
    assert sol.dual_value.lo <= sol.dual_value.hi
    assert sol.primal_value is not None
    assert sol.primal_value.hi >= sol.dual_value.lo


def test_dual_coordinates_bounded():
    # optimal coordinates sit in [1/2, n] when the Gram is almost-identity
    for seed in range(3):
        inst = _bhcp(6, "no" if seed % 2 else "yes", seed)
        params = KernelParams.for_instance_size(6)
        for svm in build_three_svms(inst, params)[:2]:
            sol = solve_dual(svm, mpfr("1e-40"), BITS)
            for a in sol.alpha:
                assert a.hi >= mpfr("0.4999")
                assert a.lo <= mpfr(svm.n_points) + mpfr("0.0001")


def test_feasible_alpha_certifies_margins():
    inst = _bhcp(5, "yes", 2)
    params = KernelParams.for_instance_size(5)
    svm = build_three_svms(inst, params)[2]
    sol = solve_dual(svm, mpfr("1e-40"), BITS)
    scaled = feasible_alpha(svm, sol, BITS)
    Q = _q_matrix(_signed_gram(svm, BITS), svm.labels, BITS)
    from erm_lab.svm_reduction import _margins
    for m in _margins(Q, scaled, BITS):
        assert m.hi >= 1


def test_bias_reduction_matches_equality_reference():
    # reduced gamma-space solve vs projected gradient on the full equality-
    # constrained dual
    inst = _bhcp(4, "yes", 7)
    params = KernelParams.for_instance_size(4)
    svm = build_three_svms(inst, params)[2]
    bias = build_bias_instance(svm, params)
    tol = mpfr("1e-35")
    fast = solve_bias_reduced(bias, tol, BITS)
    ref = solve_equality_reference(bias, mpfr("1e-20"), BITS)
    # the reference returns a certified lower bound on the optimum
    assert ref.lo <= fast.dual_value.hi
    assert abs(float(fast.dual_value.mid()) - float(ref.mid())) < 1e-10


def test_pad_length_grows_polylog():
    assert pad_length(2) == 1
    assert pad_length(8) == 27
    assert pad_length(16) == 64


def test_start_bits_scale_with_bandwidth():
    p = KernelParams.for_instance_size(16)
    assert start_bits_for(p, 3) > start_bits_for(p, 2) >= 192


@pytest.mark.parametrize("fn", [svm_distinguisher, svm_bias_distinguisher,
                                soft_margin_distinguisher])
def test_distinguishers_agree_with_oracle(fn):
    for seed in range(4):
        n = 4 + 2 * seed
        inst = _bhcp(n, "yes" if seed % 2 else "no", seed)
        want = Answer.YES if solve(inst).has_pair else Answer.NO
        verdict = fn(inst)
        assert verdict.answer is want


def test_soft_margin_rejects_large_lambda():
    inst = _bhcp(4, "no", 3)
    with pytest.raises(ParameterError):
        soft_margin_distinguisher(inst, lambda_=Fraction(1))


def test_duplicate_points_rejected():
    v = BitVector(6, 0b101010)
    w = BitVector(6, 0b010101)
    from erm_lab.instances import InstanceKind, VectorPairInstance
    inst = VectorPairInstance(kind=InstanceKind.BHCP, A=(v, w), B=(v,), d=6, t=2)
    with pytest.raises(Exception):
        svm_distinguisher(inst)
