"""BHCP decided through entry sums of centered kernel matrices.

For the Gaussian kernel the trace of the centered Gram matrix of a point set
P is |P| - s(K_P)/|P| where s(.) sums all entries, so the quantity

    (s(K_{A u B}) - s(K_A) - s(K_B)) / 2  =  sum_{i,j} k(a_i, b_j)

is recoverable from three centered-trace computations.  A close pair forces
one summand above exp(-C(t-1)); no close pair caps the whole sum at
n*m*exp(-C*t).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from gmpy2 import mpfr

from .instances import InstanceKind, ValidationError, VectorPairInstance
from .kernels import KernelMatrix, KernelParams, entry_sum, gram, kernel_of_sqdist
from .precision import Interval, interval_sum, precision_ladder
from .svm_reduction import _require_distinct, start_bits_for
from .verdict import Answer, ReductionVerdict


def centered_trace(K: KernelMatrix, bits: int) -> Interval:
    """Trace of (I - J/n) K (I - J/n) for a unit-diagonal self-Gram K."""
    if not K.symmetric or K.rows != K.cols:
        raise ValidationError("centered trace needs a square self-Gram")
    n = K.rows
    s = entry_sum(K, bits)
    return Interval.exact(n, bits).sub(s.div(Interval.exact(n, bits), bits), bits)


def cross_sum_from_traces(inst: VectorPairInstance, params: KernelParams,
                          bits: int) -> Interval:
    """sum_{i,j} k(a_i,b_j) recovered from the three self-Gram entry sums."""
    ka = entry_sum(gram(inst.A, None, params, bits), bits)
    kb = entry_sum(gram(inst.B, None, params, bits), bits)
    kab = entry_sum(gram(inst.A + inst.B, None, params, bits), bits)
    half = Interval.exact(Fraction(1, 2), bits)
    return kab.sub(ka, bits).sub(kb, bits).mul(half, bits)


def cross_sum_direct(inst: VectorPairInstance, params: KernelParams,
                     bits: int) -> Interval:
    """Independent evaluation: sum the rectangular cross-Gram entrywise."""
    K = gram(inst.A, inst.B, params, bits)
    return entry_sum(K, bits)


@dataclass
class KpcaDetails:
    cross_sum: Interval
    traces: tuple[Interval, Interval, Interval]
    bits: int


def kpca_distinguisher(inst: VectorPairInstance,
                       params: Optional[KernelParams] = None,
                       start_bits: Optional[int] = None,
                       cap: Optional[int] = None) -> ReductionVerdict:
    if inst.kind is not InstanceKind.BHCP:
        raise ValidationError("KPCA distinguisher takes a BHCP instance")
    _require_distinct(inst)
    params = params or KernelParams.for_instance_size(inst.n)
    t = inst.t
    t0 = time.perf_counter()
    start = start_bits or start_bits_for(params, t)
    last = None
    for bits in precision_ladder(start, cap):
        ga = gram(inst.A, None, params, bits)
        gb = gram(inst.B, None, params, bits)
        gab = gram(inst.A + inst.B, None, params, bits)
        traces = (centered_trace(ga, bits), centered_trace(gb, bits),
                  centered_trace(gab, bits))
        half = Interval.exact(Fraction(1, 2), bits)
        s = entry_sum(gab, bits).sub(entry_sum(ga, bits), bits) \
            .sub(entry_sum(gb, bits), bits).mul(half, bits)
        delta = kernel_of_sqdist(t, params, bits)            # exp(-C t)
        delta_cap = kernel_of_sqdist(t - 1, params, bits)    # exp(-C (t-1))
        no_bound = delta.mul(Interval.exact(inst.n * inst.m, bits), bits)
        yes_bound = delta_cap.mul(half, bits)
        threshold = Interval(no_bound.lo, yes_bound.hi)
        if threshold.lo >= threshold.hi:
            raise ValidationError("degenerate KPCA gap: n*m*exp(-Ct) >= exp(-C(t-1))/2")
        details = KpcaDetails(cross_sum=s, traces=traces, bits=bits)
        last = (s, threshold, bits, details)
        if s.lo >= threshold.hi:
            return ReductionVerdict(Answer.YES, s, threshold, "kpca", bits,
                                    time.perf_counter() - t0, details)
        if s.hi <= threshold.lo:
            return ReductionVerdict(Answer.NO, s, threshold, "kpca", bits,
                                    time.perf_counter() - t0, details)
    s, threshold, bits, details = last
    return ReductionVerdict(Answer.UNDECIDABLE, s, threshold, "kpca", bits,
                            time.perf_counter() - t0, details)
