"""BHCP decided through gaps between hard-margin SVM optima.

Three dual SVMs are built from a BHCP instance (set A with label +1, set B
with label -1, and the union), each solved by projected coordinate ascent to a
certified two-sided value; the decision compares
val(A,B) - val(A) - val(B) against a threshold sitting strictly between the
NO-case and YES-case bounds.  Bias-term and soft-margin (box-constrained)
variants reduce to the same machinery.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .instances import BitVector, InstanceKind, ValidationError, VectorPairInstance
from .kernels import KernelParams, kernel_of_sqdist
from .oracles import hamming
from .precision import (Interval, PrecisionError, _down, _up, exact_abs,
                        exact_neg, interval_sum, precision_ladder)
from .verdict import Answer, ReductionVerdict


class SolverError(RuntimeError):
    """Dual solve failed to certify within the iteration cap."""


class ParameterError(ValueError):
    """Reduction parameters outside the regime the gap analysis covers."""


@dataclass(frozen=True)
class SignedPoint:
    """A point sign * [vec ; 1^pad] with coordinates in {-1, 0, 1}."""

    vec: BitVector
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValidationError("sign must be +1 or -1")

    def coordinates(self, pad: int = 0) -> tuple[int, ...]:
        base = tuple(self.sign * b for b in self.vec) + (self.sign,) * pad
        return base


def signed_sqdist(p: SignedPoint, q: SignedPoint, pad: int = 0) -> int:
    """Exact squared Euclidean distance between padded signed points."""
    if p.sign == q.sign:
        return hamming(p.vec, q.vec)
    # ||x + y||^2 over {0,1} coordinates plus the shared all-ones pad.
    xor = (p.vec.word ^ q.vec.word).bit_count()
    both = (p.vec.word & q.vec.word).bit_count()
    return xor + 4 * (both + pad)


@dataclass(frozen=True)
class SvmInstance:
    points: tuple[SignedPoint, ...]
    labels: tuple[int, ...]
    params: KernelParams
    bias: bool = False
    pad: int = 0
    lambda_: Optional[Fraction] = None
    box_bound: Optional[Fraction] = None

    def __post_init__(self):
        if len(self.points) != len(self.labels):
            raise ValidationError("labels length must match points length")
        if any(y not in (-1, 1) for y in self.labels):
            raise ValidationError("labels must be +/-1")
        if (self.lambda_ is None) != (self.box_bound is None):
            raise ValidationError("soft margin requires both lambda and box_bound")

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass
class SvmSolution:
    alpha: list[Interval]
    dual_value: Interval
    primal_value: Optional[Interval]
    kkt_residual: Interval
    iterations: int


def build_three_svms(inst: VectorPairInstance, params: KernelParams
                     ) -> tuple[SvmInstance, SvmInstance, SvmInstance]:
    if inst.kind is not InstanceKind.BHCP:
        raise ValidationError("SVM reduction takes a BHCP instance")
    if not inst.A or not inst.B:
        raise ValidationError("empty A or B")
    pa = tuple(SignedPoint(a) for a in inst.A)
    pb = tuple(SignedPoint(b) for b in inst.B)
    svm1 = SvmInstance(points=pa, labels=(1,) * len(pa), params=params)
    svm2 = SvmInstance(points=pb, labels=(-1,) * len(pb), params=params)
    svm3 = SvmInstance(points=pa + pb, labels=(1,) * len(pa) + (-1,) * len(pb),
                       params=params)
    return svm1, svm2, svm3


def _require_distinct(inst: VectorPairInstance) -> None:
    words = {v.word for v in inst.A} | {v.word for v in inst.B}
    if len(words) != inst.n + inst.m:
        raise ValidationError("kernel reductions require all vectors in A u B distinct")


def _signed_gram(svm: SvmInstance, bits: int) -> list[list[Interval]]:
    pts = svm.points
    n = len(pts)
    K = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = kernel_of_sqdist(signed_sqdist(pts[i], pts[j], svm.pad), svm.params, bits)
            K[i][j] = v
            K[j][i] = v
    return K


def _q_matrix(K: Sequence[Sequence[Interval]], labels: Sequence[int], bits: int
              ) -> list[list[Interval]]:
    n = len(labels)
    return [[K[i][j] if labels[i] == labels[j] else K[i][j].neg()
             for j in range(n)] for i in range(n)]


def _coordinate_box(Q: Sequence[Sequence[Interval]], bits: int) -> mpfr:
    """Certified bound on every coordinate of any maximizer of
    1^T a - a^T Q a / 2 over a >= 0, valid when Q is near-identity."""
    u = _up(bits)
    n = len(Q)
    dmin = min(Q[i][i].lo for i in range(n))
    eps = mpfr(0)
    for i in range(n):
        for j in range(n):
            if i != j:
                eps = max(eps, Q[i][j].mag_hi())
    c2 = u.sub(dmin, u.mul(eps, mpfr(n)))  # 2c = dmin - eps*n
    if c2 <= mpfr("0.2"):
        raise SolverError("Gram matrix too far from identity for certified bounds")
    d = _down(bits)
    c = d.div(c2, mpfr(2))
    m0 = u.div(mpfr(1), d.mul(mpfr(4), c))  # per-coordinate objective cap
    # largest G with G - c G^2 + (n-1) m0 >= 0
    disc = u.sqrt(u.add(mpfr(1), u.mul(u.mul(mpfr(4), c), u.mul(m0, mpfr(n - 1)))))
    return u.div(u.add(mpfr(1), disc), d.mul(mpfr(2), c))


def _objective_interval(Q, alpha_pts: list[Interval], bits: int) -> Interval:
    lin = interval_sum(alpha_pts, bits)
    quad = _quad_interval(Q, alpha_pts, bits)
    half = quad.mul(Interval.exact(Fraction(1, 2), bits), bits)
    return lin.sub(half, bits)


def _quad_interval(Q, alpha_pts: list[Interval], bits: int) -> Interval:
    n = len(Q)
    terms = []
    for i in range(n):
        row = interval_sum((Q[i][j].mul(alpha_pts[j], bits) for j in range(n)), bits)
        terms.append(alpha_pts[i].mul(row, bits))
    return interval_sum(terms, bits)


def solve_dual(svm: SvmInstance, tol: mpfr, bits: int,
               Q: Optional[list[list[Interval]]] = None,
               want_primal: bool = True, max_sweeps: int = 2000) -> SvmSolution:
    """Projected coordinate ascent on the concave dual with certified bounds.

    The returned dual_value interval contains the exact dual optimum:
    the lower endpoint evaluates the objective at the final (exact mpfr)
    iterate, the upper endpoint adds a KKT-gap bound over the certified
    coordinate box.
    """
    if Q is None:
        K = _signed_gram(svm, bits)
        Q = _q_matrix(K, svm.labels, bits)
    n = len(Q)
    ctx = gmpy2.context(precision=bits)
    u, dn = _up(bits), _down(bits)
    ub_cert = _coordinate_box(Q, bits)
    box = None
    if svm.box_bound is not None:
        box = Interval.exact(svm.box_bound, bits).lo  # conservative feasible box
    ub = ub_cert if box is None else min(ub_cert, box)

    Qm = [[q.mid() for q in row] for row in Q]
    alpha = [mpfr(0, precision=bits)] * n
    qa = [mpfr(0, precision=bits)] * n  # Qm @ alpha, maintained incrementally
    gap = None
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for i in range(n):
            g = ctx.sub(mpfr(1), qa[i])
            new = ctx.add(alpha[i], ctx.div(g, Qm[i][i]))
            if new < 0:
                new = mpfr(0, precision=bits)
            if box is not None and new > box:
                new = box
            delta = ctx.sub(new, alpha[i])
            if delta != 0:
                alpha[i] = new
                for j in range(n):
                    qa[j] = ctx.add(qa[j], ctx.mul(Qm[j][i], delta))
        # certified KKT gap at the exact iterate
        alpha_pts = [Interval.point(a) for a in alpha]
        gap = mpfr(0)
        for i in range(n):
            gi = Interval.one(bits).sub(
                interval_sum((Q[i][j].mul(alpha_pts[j], bits) for j in range(n)), bits), bits)
            if gi.hi > 0:
                headroom = u.sub(ub, alpha[i])
                if headroom > 0:
                    gap = u.add(gap, u.mul(gi.hi, headroom))
            if gi.lo < 0 and alpha[i] > 0:
                gap = u.add(gap, u.mul(exact_neg(gi.lo), alpha[i]))
        if gap <= tol:
            break
    else:
        raise SolverError(f"no certified convergence after {max_sweeps} sweeps "
                          f"(gap {gap}, tol {tol})")

    alpha_pts = [Interval.point(a) for a in alpha]
    obj = _objective_interval(Q, alpha_pts, bits)
    dual_value = Interval(max(obj.lo, mpfr(0)), u.add(obj.hi, gap))
    kkt = Interval(mpfr(0), gap)

    primal = None
    if want_primal and not svm.bias and svm.box_bound is None:
        margins = _margins(Q, alpha_pts, bits)
        m_lo = min(m.lo for m in margins)
        if m_lo <= 0:
            raise SolverError("iterate margin not certified positive")
        quad = _quad_interval(Q, alpha_pts, bits)
        half = Interval.exact(Fraction(1, 2), bits)
        if m_lo >= 1:
            scaled_hi = quad.mul(half, bits).hi
        else:
            s2 = u.div(mpfr(1), dn.mul(m_lo, m_lo))
            scaled_hi = u.mul(u.div(quad.hi, mpfr(2)), s2)
        primal = Interval(dual_value.lo, max(scaled_hi, dual_value.lo))
    return SvmSolution(alpha=alpha_pts, dual_value=dual_value,
                       primal_value=primal, kkt_residual=kkt, iterations=sweeps)


def _margins(Q, alpha_pts, bits) -> list[Interval]:
    n = len(Q)
    return [interval_sum((Q[i][j].mul(alpha_pts[j], bits) for j in range(n)), bits)
            for i in range(n)]


def feasible_alpha(svm: SvmInstance, sol: SvmSolution, bits: int) -> list[Interval]:
    """Scale the iterate so every primal margin is certified >= 1."""
    Q = _q_matrix(_signed_gram(svm, bits), svm.labels, bits)
    margins = _margins(Q, sol.alpha, bits)
    m_lo = min(m.lo for m in margins)
    if m_lo <= 0:
        raise SolverError("cannot scale to feasibility: nonpositive margin")
    if m_lo >= 1:
        return list(sol.alpha)
    inv = Interval.one(bits).div(Interval.point(m_lo), bits)
    return [a.mul(inv, bits) for a in sol.alpha]


# -- bias-term construction (Appendix-style +/- doubling) ---------------------

def pad_length(n: int) -> int:
    """ceil(log2(n)^3) all-ones coordinates appended before sign-doubling."""
    return max(1, math.ceil(math.log2(max(n, 2)) ** 3))


def build_bias_instance(svm: SvmInstance, params: Optional[KernelParams] = None
                        ) -> SvmInstance:
    if svm.bias:
        raise ValidationError("already a bias instance")
    n = svm.n_points
    pad = pad_length(n)
    points = tuple(SignedPoint(p.vec, 1) for p in svm.points) + \
        tuple(SignedPoint(p.vec, -1) for p in svm.points)
    labels = svm.labels + tuple(-y for y in svm.labels)
    return SvmInstance(points=points, labels=labels, params=params or svm.params,
                       bias=True, pad=pad)


def _bias_gamma_q(bias_svm: SvmInstance, bits: int) -> list[list[Interval]]:
    """Q of the symmetric gamma-space dual: y_i y_j (k(x_i,x_j) - k(x_i,-x_j))."""
    n = bias_svm.n_points // 2
    pts = bias_svm.points[:n]
    labels = bias_svm.labels[:n]
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            same = kernel_of_sqdist(signed_sqdist(pts[i], pts[j], bias_svm.pad),
                                    bias_svm.params, bits)
            opp = kernel_of_sqdist(
                signed_sqdist(pts[i], SignedPoint(pts[j].vec, -1), bias_svm.pad),
                bias_svm.params, bits)
            v = same.sub(opp, bits)
            row.append(v if labels[i] == labels[j] else v.neg())
        rows.append(row)
    return rows


def solve_bias_reduced(bias_svm: SvmInstance, tol: mpfr, bits: int) -> SvmSolution:
    """Solve the gamma-space dual of a +/- doubled instance.

    By the swap symmetry of the doubled dual, alpha_i = beta_i = gamma_i at the
    optimum and the equality constraint is vacuous; the returned value V is
    the halved doubled objective.
    """
    if not bias_svm.bias:
        raise ValidationError("expected a bias instance")
    Q = _bias_gamma_q(bias_svm, bits)
    reduced = SvmInstance(points=bias_svm.points[:len(Q)],
                          labels=bias_svm.labels[:len(Q)],
                          params=bias_svm.params, bias=False, pad=bias_svm.pad,
                          lambda_=bias_svm.lambda_, box_bound=bias_svm.box_bound)
    return solve_dual(reduced, tol, bits, Q=Q, want_primal=False)


def solve_equality_reference(bias_svm: SvmInstance, tol: mpfr, bits: int,
                             max_iters: int = 20000) -> Interval:
    """Independent oracle: projected gradient on the full 2n-variable dual of
    the doubled instance, with the equality constraint sum(alpha_i y_i) =
    sum(beta_j y_j) enforced by alternating projections.  Returns the halved
    objective value at the final iterate (a certified lower bound on V)."""
    K = _signed_gram(bias_svm, bits)
    Q = _q_matrix(K, bias_svm.labels, bits)
    N = len(Q)
    n = N // 2
    ctx = gmpy2.context(precision=bits)
    Qm = [[q.mid() for q in row] for row in Q]
    ys = [mpfr(y) for y in bias_svm.labels]
    x = [mpfr(0, precision=bits)] * N
    step = mpfr("0.5")
    def csum(terms):
        acc = mpfr(0, precision=bits)
        for term in terms:
            acc = ctx.add(acc, term)
        return acc

    for _ in range(max_iters):
        qa = [csum(ctx.mul(Qm[i][j], x[j]) for j in range(N)) for i in range(N)]
        g = [ctx.sub(mpfr(1), qa[i]) for i in range(N)]
        x = [ctx.add(x[i], ctx.mul(step, g[i])) for i in range(N)]
        for _ in range(50):
            # project onto the constraint hyperplane, then the nonnegative cone
            resid = ctx.sub(csum(ctx.mul(ys[i], x[i]) for i in range(n)),
                            csum(ctx.mul(ys[n + i], x[n + i]) for i in range(n)))
            adj = ctx.div(resid, mpfr(N))
            x = [ctx.sub(x[i], ctx.mul(adj, ys[i] if i < n else exact_neg(ys[i])))
                 for i in range(N)]
            if all(v >= 0 for v in x):
                break
            x = [max(v, mpfr(0)) for v in x]
        if max(exact_abs(v) for v in g) < tol:
            break
    pts = [Interval.point(v) for v in x]
    obj = _objective_interval(Q, pts, bits)
    return obj.mul(Interval.exact(Fraction(1, 2), bits), bits)


# -- distinguishers ------------------------------------------------------------

DEFAULT_K_BOX = Fraction(4)


def start_bits_for(params: KernelParams, t: int) -> int:
    """Working precision sized to the decision scale exp(-C*t)."""
    c_hi = float(params.c_interval(64).hi)
    return max(192, 4 * math.ceil(c_hi * t / math.log(2)))


def _check_gap_regime(params: KernelParams, n: int, bits: int) -> None:
    # Delta/8 separates the YES and NO gap bounds iff exp(C) > 3200 n^6
    c = params.c_interval(bits)
    lhs = c.lo
    rhs = math.log(3200) + 6 * math.log(n)
    if not lhs > rhs:
        raise ParameterError(
            f"C={float(lhs):.3f} too small for the SVM gap sandwich at n={n}: "
            f"need C > ln(3200 n^6) = {rhs:.3f}")


@dataclass
class SvmGapDetails:
    solutions: tuple[SvmSolution, SvmSolution, SvmSolution]
    gap: Interval
    threshold: Interval
    tol: mpfr
    bits: int
    variant: str


def _gap_verdict(inst: VectorPairInstance, params: Optional[KernelParams],
                 variant: str, lambda_: Optional[Fraction] = None,
                 k_box: Fraction = DEFAULT_K_BOX,
                 start_bits: Optional[int] = None,
                 cap: Optional[int] = None) -> ReductionVerdict:
    if inst.kind is not InstanceKind.BHCP:
        raise ValidationError("SVM distinguishers take BHCP instances")
    _require_distinct(inst)
    params = params or KernelParams.for_instance_size(inst.n)
    t = inst.t
    t0 = time.perf_counter()
    start = start_bits or start_bits_for(params, t)
    last = None
    for bits in precision_ladder(start, cap):
        _check_gap_regime(params, max(inst.n, 2), bits)
        delta_cap = kernel_of_sqdist(t - 1, params, bits)  # exp(-C(t-1))
        tol_stat = _down(bits).div(delta_cap.lo, mpfr(100))
        n_all = 2 * max(inst.n, inst.m)
        tol_solve = _down(bits).div(tol_stat, mpfr(max(20 * n_all * n_all, 4)))
        theta = delta_cap.mul(Interval.exact(Fraction(1, 8), bits), bits)

        svms = build_three_svms(inst, params)
        sols = []
        for svm in svms:
            if variant == "svm":
                sols.append(solve_dual(svm, tol_solve, bits))
            else:
                bias_inst = build_bias_instance(svm, params)
                if variant == "svm_soft":
                    lam = lambda_ if lambda_ is not None else Fraction(1) / (k_box * svm.n_points ** 2)
                    if lam > Fraction(1) / (k_box * svm.n_points ** 2):
                        raise ParameterError(
                            f"lambda={lam} exceeds the soft-margin bound "
                            f"1/(K_box n^2) = {Fraction(1) / (k_box * svm.n_points**2)}")
                    box = Fraction(1) / (lam * svm.n_points)
                    bias_inst = SvmInstance(points=bias_inst.points,
                                            labels=bias_inst.labels,
                                            params=params, bias=True,
                                            pad=bias_inst.pad,
                                            lambda_=lam, box_bound=box)
                sols.append(solve_bias_reduced(bias_inst, tol_solve, bits))
        v1, v2, v3 = (s.dual_value for s in sols)
        gap = v3.sub(v1, bits).sub(v2, bits)
        details = SvmGapDetails(solutions=tuple(sols), gap=gap, threshold=theta,
                                tol=tol_stat, bits=bits, variant=variant)
        last = (gap, theta, bits, details)
        if gap.lo >= theta.hi:
            return ReductionVerdict(Answer.YES, gap, theta, variant, bits,
                                    time.perf_counter() - t0, details)
        if gap.hi <= theta.lo:
            return ReductionVerdict(Answer.NO, gap, theta, variant, bits,
                                    time.perf_counter() - t0, details)
    gap, theta, bits, details = last
    return ReductionVerdict(Answer.UNDECIDABLE, gap, theta, variant, bits,
                            time.perf_counter() - t0, details)


def svm_distinguisher(inst: VectorPairInstance, params: Optional[KernelParams] = None,
                      start_bits: Optional[int] = None,
                      cap: Optional[int] = None) -> ReductionVerdict:
    return _gap_verdict(inst, params, "svm", start_bits=start_bits, cap=cap)


def svm_bias_distinguisher(inst: VectorPairInstance, params: Optional[KernelParams] = None,
                           start_bits: Optional[int] = None,
                           cap: Optional[int] = None) -> ReductionVerdict:
    return _gap_verdict(inst, params, "svm_bias", start_bits=start_bits, cap=cap)


def soft_margin_distinguisher(inst: VectorPairInstance,
                              params: Optional[KernelParams] = None,
                              lambda_: Optional[Fraction] = None,
                              k_box: Fraction = DEFAULT_K_BOX,
                              start_bits: Optional[int] = None,
                              cap: Optional[int] = None) -> ReductionVerdict:
    return _gap_verdict(inst, params, "svm_soft", lambda_=lambda_, k_box=k_box,
                        start_bits=start_bits, cap=cap)
