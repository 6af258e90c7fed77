"""BHCP decided through entry sums of inverse kernel matrices.

With a near-identity Gaussian Gram K = I + E, the inverse is I - E plus
higher-order terms, so

    (s(K_A^-1) + s(K_B^-1) - s(K_{A u B}^-1)) / 2

recovers the cross-kernel sum sum_{i,j} k(a_i, b_j) up to a correction in
which every term carries at least one cross-block factor.  Writing eps for
the largest off-diagonal entry and N for the union size, the correction is
at most rho = N^3 eps / (2 (1 - N eps)) times the largest cross entry, which
keeps the YES/NO gap intact whenever rho <= 1/2.

Each inverse is certified: a midpoint Cholesky inverse is wrapped in an
entrywise interval enclosure driven by the residual I - R K.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from gmpy2 import mpfr

from .instances import InstanceKind, ValidationError, VectorPairInstance
from .kernels import (KernelMatrix, KernelParams, gram, kernel_of_sqdist,
                      off_diagonal_sup)
from .linalg import (IMatrix, enclose_inverse, imat_entry_sum, imat_from_lists,
                     imat_mul, imat_sub, overlap_entrywise)
from .precision import Interval, PrecisionError, _down, _up, precision_ladder
from .svm_reduction import ParameterError, _require_distinct, start_bits_for
from .verdict import Answer, ReductionVerdict


def _imat(K: KernelMatrix) -> IMatrix:
    return imat_from_lists([list(row) for row in K.entries])


def spd_inverse(K: KernelMatrix, bits: int) -> IMatrix:
    """Certified entrywise enclosure of K^-1 for a near-identity Gram."""
    return enclose_inverse(_imat(K), bits)


def inverse_entry_sum(K: KernelMatrix, bits: int) -> Interval:
    return imat_entry_sum(spd_inverse(K, bits), bits)


def block_inverse_entry_sum(inst: VectorPairInstance, params: KernelParams,
                            bits: int) -> Interval:
    """Independent oracle for s(K_{A u B}^-1): invert blockwise through the
    Schur complement S = K_B - F^T K_A^-1 F."""
    n, m = inst.n, inst.m
    Ka = _imat(gram(inst.A, None, params, bits))
    Kb = _imat(gram(inst.B, None, params, bits))
    F = _imat(gram(inst.A, inst.B, params, bits))
    Ft = tuple(tuple(F[i][j] for i in range(n)) for j in range(m))
    Ai = enclose_inverse(Ka, bits)
    S = imat_sub(Kb, imat_mul(Ft, imat_mul(Ai, F, bits), bits), bits)
    Si = enclose_inverse(S, bits)
    AiF = imat_mul(Ai, F, bits)
    top_left = imat_mul(AiF, imat_mul(Si, imat_mul(Ft, Ai, bits), bits), bits)
    off = imat_mul(AiF, Si, bits)
    total = imat_entry_sum(Ai, bits).add(imat_entry_sum(top_left, bits), bits)
    total = total.add(imat_entry_sum(Si, bits), bits)
    two = Interval.exact(2, bits)
    return total.sub(imat_entry_sum(off, bits).mul(two, bits), bits)


def almost_identity_closure(eps: Interval, n: int, bits: int) -> Interval:
    """Off-diagonal bound for K^-1 when K = I + E with |E_ij| <= eps:
    eps / (1 - n eps), valid while n*eps <= 1/2."""
    ne = eps.mul(Interval.exact(n, bits), bits)
    if not ne.hi <= mpfr("0.5"):
        raise ParameterError(f"n*eps = {ne.hi} exceeds 1/2; closure bound invalid")
    return eps.div(Interval.one(bits).sub(ne, bits), bits)


def binomial_inverse_check(inst: VectorPairInstance, params: KernelParams,
                           bits: int) -> bool:
    """Direct and Schur-complement inverses of the union Gram must overlap."""
    both = gram(inst.A + inst.B, None, params, bits)
    direct = spd_inverse(both, bits)
    # rebuild the blockwise inverse entrywise for the comparison
    n, m = inst.n, inst.m
    Ka = _imat(gram(inst.A, None, params, bits))
    Kb = _imat(gram(inst.B, None, params, bits))
    F = _imat(gram(inst.A, inst.B, params, bits))
    Ft = tuple(tuple(F[i][j] for i in range(n)) for j in range(m))
    Ai = enclose_inverse(Ka, bits)
    S = imat_sub(Kb, imat_mul(Ft, imat_mul(Ai, F, bits), bits), bits)
    Si = enclose_inverse(S, bits)
    AiF = imat_mul(Ai, F, bits)
    SiFtAi = imat_mul(Si, imat_mul(Ft, Ai, bits), bits)
    tl = imat_from_lists([[Ai[i][j].add(imat_row_dot(AiF, SiFtAi, i, j, bits), bits)
                           for j in range(n)] for i in range(n)])
    tr = imat_mul(AiF, Si, bits)
    blockwise = tuple(
        tuple(tl[i][j] for j in range(n)) + tuple(tr[i][j].neg() for j in range(m))
        for i in range(n)
    ) + tuple(
        tuple(SiFtAi[i][j].neg() for j in range(n)) + tuple(Si[i][j] for j in range(m))
        for i in range(m)
    )
    return overlap_entrywise(direct, blockwise)


def imat_row_dot(A: IMatrix, B: IMatrix, i: int, j: int, bits: int) -> Interval:
    from .precision import interval_sum
    return interval_sum((A[i][k].mul(B[k][j], bits) for k in range(len(B))), bits)


def _slack_ratio(eps_hi: mpfr, N: int, bits: int) -> mpfr:
    """rho = N^3 eps / (2 (1 - N eps)), rounded up."""
    u = _up(bits)
    ne = u.mul(eps_hi, mpfr(N))
    denom = _down(bits).mul(mpfr(2), _down(bits).sub(mpfr(1), ne))
    if denom <= 0:
        raise ParameterError("N*eps >= 1: inverse-sum correction bound invalid")
    return u.div(u.mul(mpfr(N) ** 3, eps_hi), denom)


@dataclass
class KrrDetails:
    stat: Interval
    slack_ratio: mpfr
    bits: int


def krr_distinguisher(inst: VectorPairInstance,
                      params: Optional[KernelParams] = None,
                      start_bits: Optional[int] = None,
                      cap: Optional[int] = None) -> ReductionVerdict:
    if inst.kind is not InstanceKind.BHCP:
        raise ValidationError("KRR distinguisher takes a BHCP instance")
    _require_distinct(inst)
    params = params or KernelParams.for_instance_size(inst.n)
    t = inst.t
    N = inst.n + inst.m
    t0 = time.perf_counter()
    start = start_bits or start_bits_for(params, t)
    last = None
    for bits in precision_ladder(start, cap):
        ga = gram(inst.A, None, params, bits)
        gb = gram(inst.B, None, params, bits)
        gab = gram(inst.A + inst.B, None, params, bits)
        eps_hi = off_diagonal_sup(gab)
        rho = _slack_ratio(eps_hi, N, bits)
        if not rho <= mpfr("0.5"):
            raise ParameterError(f"correction ratio rho={rho} > 1/2 at n={inst.n}")
        try:
            sa = inverse_entry_sum(ga, bits)
            sb = inverse_entry_sum(gb, bits)
            sab = inverse_entry_sum(gab, bits)
        except PrecisionError:
            continue
        half = Interval.exact(Fraction(1, 2), bits)
        stat = sa.add(sb, bits).sub(sab, bits).mul(half, bits)
        delta = kernel_of_sqdist(t, params, bits)          # exp(-C t)
        delta_cap = kernel_of_sqdist(t - 1, params, bits)  # exp(-C (t-1))
        u = _up(bits)
        no_hi = u.mul(delta.hi, u.add(mpfr(inst.n * inst.m), rho))
        yes_lo = _down(bits).mul(delta_cap.lo, mpfr("0.5"))
        if not no_hi < yes_lo:
            raise ParameterError("degenerate KRR gap at these parameters")
        threshold = Interval(no_hi, yes_lo)
        details = KrrDetails(stat=stat, slack_ratio=rho, bits=bits)
        last = (stat, threshold, bits, details)
        if stat.lo >= threshold.hi:
            return ReductionVerdict(Answer.YES, stat, threshold, "krr", bits,
                                    time.perf_counter() - t0, details)
        if stat.hi <= threshold.lo:
            return ReductionVerdict(Answer.NO, stat, threshold, "krr", bits,
                                    time.perf_counter() - t0, details)
    if last is None:
        raise PrecisionError("inverse enclosure never certified within the precision cap")
    stat, threshold, bits, details = last
    return ReductionVerdict(Answer.UNDECIDABLE, stat, threshold, "krr", bits,
                            time.perf_counter() - t0, details)
