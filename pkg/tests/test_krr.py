"""Inverse-Gram trace statistic: enclosure soundness, the blockwise inverse
oracle, and the almost-identity inverse bound."""

import random
from fractions import Fraction

import pytest

from erm_lab.instances import generate, default_dimension, default_threshold
from erm_lab.kernels import KernelParams, gram
from erm_lab.krr_reduction import (ParameterError, almost_identity_closure,
                                   binomial_inverse_check,
                                   block_inverse_entry_sum,
                                   inverse_entry_sum, spd_inverse)
from erm_lab.kpca_reduction import cross_sum_direct
from erm_lab.oracles import solve
from erm_lab.precision import Interval
from erm_lab.verdict import Answer
from erm_lab import krr_distinguisher

BITS = 512


def _bhcp(n, planted, seed):
    d = default_dimension(n)
    return generate("BHCP", n, d, t=default_threshold(d), planted=planted, seed=seed)


def _exact_inverse(M):
    # Gauss-Jordan over Fractions; the test-side truth for small matrices
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col]))
        A[col], A[piv] = A[piv], A[col]
        if A[col][col] == 0:
            raise ZeroDivisionError
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [vr - f * vc for vr, vc in zip(A[r], A[col])]
    return [row[n:] for row in A]


def test_spd_inverse_encloses_exact_rational_inverse():
    rng = random.Random(4)
    for _ in range(10):
        n = rng.randint(2, 5)
        # diagonally dominant symmetric rational matrix
        M = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                v = Fraction(rng.randint(-100, 100), 1000)
                M[i][j] = M[j][i] = v
            M[i][i] = Fraction(1) + abs(M[i][i])
        exact = _exact_inverse(M)
        Mi = tuple(tuple(Interval.exact(M[i][j], BITS) for j in range(n))
                   for i in range(n))
        from erm_lab.linalg import enclose_inverse
        enc = enclose_inverse(Mi, BITS)
        for i in range(n):
            for j in range(n):
                assert enc[i][j].contains(exact[i][j])


def test_inverse_trace_statistic_close_to_cross_sum():
    for seed in range(4):
        n = 3 + seed
        inst = _bhcp(n, "yes" if seed % 2 else "no", seed)
        params = KernelParams.for_instance_size(n)
        bits = 1500
        ka = gram(inst.A, None, params, bits)
        kb = gram(inst.B, None, params, bits)
        kab = gram(inst.A + inst.B, None, params, bits)
        half = Interval.exact(Fraction(1, 2), bits)
        stat = inverse_entry_sum(ka, bits).add(inverse_entry_sum(kb, bits), bits) \
            .sub(inverse_entry_sum(kab, bits), bits).mul(half, bits)
        cross = cross_sum_direct(inst, params, bits)
        # correction terms carry at least one cross-kernel factor, so the two
        # agree to within a tiny multiple of the largest cross entry
        fmax = max(cross.hi, stat.hi)
        assert abs(float(stat.mid()) - float(cross.mid())) <= max(
            2e-2 * abs(float(fmax)), 1e-200)


def test_block_inverse_matches_direct():
    for seed in range(3):
        n = 3 + seed
        inst = _bhcp(n, "no", 30 + seed)
        params = KernelParams.for_instance_size(n)
        assert binomial_inverse_check(inst, params, 1500)


def test_block_inverse_entry_sum_overlaps_direct():
    inst = _bhcp(4, "yes", 17)
    params = KernelParams.for_instance_size(4)
    bits = 1500
    kab = gram(inst.A + inst.B, None, params, bits)
    direct = inverse_entry_sum(kab, bits)
    blockwise = block_inverse_entry_sum(inst, params, bits)
    assert direct.overlaps(blockwise)


def test_almost_identity_closure_bound_holds():
    rng = random.Random(9)
    for _ in range(20):
        n = rng.randint(2, 6)
        eps = Fraction(1, rng.randint(4 * n, 20 * n))
        E = [[Fraction(rng.randint(-eps.denominator, eps.denominator)) * eps
              / eps.denominator for _ in range(n)] for _ in range(n)]
        M = [[Fraction(int(i == j)) + E[i][j] for j in range(n)] for i in range(n)]
        inv = _exact_inverse(M)
        bound = eps / (1 - n * eps)
        for i in range(n):
            for j in range(n):
                dev = abs(inv[i][j] - int(i == j))
                assert dev <= bound


def test_almost_identity_closure_validates_domain():
    with pytest.raises(ParameterError):
        almost_identity_closure(Interval.exact(Fraction(1, 4), 128), 3, 128)


def test_krr_distinguisher_agrees_with_oracle():
    for seed in range(4):
        n = 4 + 2 * seed
        inst = _bhcp(n, "yes" if seed % 2 else "no", 70 + seed)
        want = Answer.YES if solve(inst).has_pair else Answer.NO
        verdict = krr_distinguisher(inst)
        assert verdict.answer is want
        assert verdict.details.slack_ratio <= 0.5
