"""OVP decided through the optimum of a one-hidden-layer ERM problem.

From an orthogonal-vectors instance (A, B) a 3n x n matrix M is built whose
rows are activations of hidden units: the top block has entry 1 exactly when
a_i . b_j = 0 (and 0 otherwise), and the two lower blocks are copies of
n^-T times the identity, labelled +1 and -1.  Training the free final layer
alpha against a margin-type loss l gives optimum

    >= 3n l(0)          when no orthogonal pair exists,
    <= (3n - 1) l(0)    when one does (witnessed by alpha = n^E * 1),

so comparing the optimum against (3n - 1/2) l(0) decides the instance.

A companion gadget reads the answer off the gradient at alpha = 0: with
hidden units S(a_i . b_j) that are 1 (or 1/2) on orthogonal pairs and
(near-)zero otherwise, the entry sum of the gradient is l'(0) times the
(weighted) orthogonal-pair count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import gmpy2
from gmpy2 import mpfr

from .instances import (InstanceKind, ValidationError, VectorPairInstance,
                        normalize)
from .oracles import dot
from .precision import (DEFAULT_BITS, Interval, exact_abs, interval_exp,
                        interval_ln, interval_sum)
from .verdict import Answer, ReductionVerdict

DEFAULT_T = 8


class LossKind(str, Enum):
    HINGE = "hinge"
    LOGISTIC = "logistic"


class ActivationKind(str, Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class NiceLoss:
    """Convex decreasing loss with l(0) = 1 and l'(0) < 0."""

    kind: LossKind

    @property
    def at_zero(self) -> Fraction:
        return Fraction(1)

    @property
    def slope_magnitude_bound(self) -> Fraction:
        # |l'| <= this everywhere; enters the certificate exponent
        return Fraction(1)

    def value(self, x: Interval, bits: int) -> Interval:
        if self.kind is LossKind.HINGE:
            zero = Interval.zero(bits)
            v = Interval.one(bits).sub(x, bits)
            lo = max(v.lo, zero.lo)
            hi = max(v.hi, zero.hi)
            return Interval(lo, hi)
        # log2(1 + e^-x)
        e = interval_exp(x.neg(), bits)
        num = interval_ln(Interval.one(bits).add(e, bits), bits)
        den = interval_ln(Interval.exact(2, bits), bits)
        return num.div(den, bits)

    def value_exact(self, x: Fraction) -> Fraction:
        if self.kind is not LossKind.HINGE:
            raise ValidationError("exact evaluation only for the hinge loss")
        return max(Fraction(0), 1 - x)

    def slope_at_zero(self, bits: int) -> Interval:
        if self.kind is LossKind.HINGE:
            return Interval.exact(Fraction(-1), bits)
        # -1 / (2 ln 2)
        two_ln2 = interval_ln(Interval.exact(2, bits), bits).scale_int(2, bits)
        return Interval.exact(Fraction(-1), bits).div(two_ln2, bits)


def activation_value(kind: ActivationKind, x: Fraction, bits: int = DEFAULT_BITS
                     ) -> Interval:
    """S(x) at an exact rational argument."""
    if kind is ActivationKind.RELU:
        return Interval.exact(max(Fraction(0), x), bits)
    # sigmoid 1 / (1 + e^-x)
    xi = Interval.exact(x, bits)
    e = interval_exp(xi.neg(), bits)
    return Interval.one(bits).div(Interval.one(bits).add(e, bits), bits)


def activation_levels(n: int, T: int) -> tuple[Fraction, Fraction, Fraction]:
    """The three affine levels (v0, v1, v2) the hidden units are driven to."""
    if n < 2:
        raise ValidationError("need n >= 2")
    nT = Fraction(n) ** T
    return Fraction(1), 1 / nT, -1 + 2 / nT


@dataclass(frozen=True)
class ErmMatrixInstance:
    """3n x n hidden-unit activation matrix with its row labels."""

    entries: tuple[tuple[Fraction, ...], ...]
    labels: tuple[int, ...]
    n: int
    T: int
    m1_args: tuple[tuple[Fraction, ...], ...]
    m2_args: tuple[tuple[Fraction, ...], ...]

    def example_vector(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i]

    def nonzero_top_rows(self) -> int:
        return sum(1 for i in range(self.n)
                   if any(v != 0 for v in self.entries[i]))


def build_layer_matrix(inst: VectorPairInstance, T: int = DEFAULT_T
                       ) -> ErmMatrixInstance:
    """ReLU hidden-unit matrix of the ERM reduction for an OVP instance."""
    if inst.kind is not InstanceKind.OVP:
        raise ValidationError("ERM reduction takes an OVP instance")
    if inst.n != inst.m:
        raise ValidationError("need |A| == |B|")
    if T < 4:
        raise ValidationError("need T >= 4")
    norm = inst if inst.normalized else normalize(inst)
    n = norm.n
    v0, v1, v2 = activation_levels(n, T)
    ones_b = norm.B[0].ones()
    m1_args, m1 = [], []
    for a in norm.A:
        row_args, row = [], []
        for b in norm.B:
            arg = v0 + (v2 - v0) * dot(a, b)
            row_args.append(arg)
            row.append(max(Fraction(0), arg))
        m1_args.append(tuple(row_args))
        m1.append(tuple(row))
    m2_args, m2 = [], []
    for bi in norm.B:
        row_args, row = [], []
        for bj in norm.B:
            comp_dot = ones_b - dot(bi, bj)   # complement(b_i) . b_j
            arg = v1 + (v2 - v1) * comp_dot
            row_args.append(arg)
            row.append(max(Fraction(0), arg))
        m2_args.append(tuple(row_args))
        m2.append(tuple(row))
    entries = tuple(m1) + tuple(m2) + tuple(m2)
    labels = (1,) * n + (1,) * n + (-1,) * n
    return ErmMatrixInstance(entries=entries, labels=labels, n=n, T=T,
                             m1_args=tuple(m1_args), m2_args=tuple(m2_args))


def certificate_exponent(T: int, k_loss: Fraction = Fraction(1)) -> int:
    """Exponent E of the witness point alpha = n^E * 1; kept below T so the
    identity blocks stay inside the linear region of the hinge."""
    return max(1, min(int(100 * k_loss), T // 4))


def erm_objective_exact(mat: ErmMatrixInstance, loss: NiceLoss,
                        alpha: tuple[Fraction, ...]) -> Fraction:
    vals = []
    for row, y in zip(mat.entries, mat.labels):
        z = sum(r * a for r, a in zip(row, alpha))
        vals.append(loss.value_exact(y * z))
    return sum(vals)


def erm_objective_interval(mat: ErmMatrixInstance, loss: NiceLoss,
                           alpha: list[Interval], bits: int) -> Interval:
    terms = []
    for row, y in zip(mat.entries, mat.labels):
        z = interval_sum((Interval.exact(r, bits).mul(alpha[j], bits)
                          for j, r in enumerate(row) if r != 0), bits)
        if y == -1:
            z = z.neg()
        terms.append(loss.value(z, bits))
    return interval_sum(terms, bits)


def erm_structural_lower_bound(mat: ErmMatrixInstance, loss: NiceLoss
                               ) -> Fraction:
    """Certified lower bound on the ERM optimum: each +/- labelled identity
    row pair contributes l(x) + l(-x) >= 2 l(0) by convexity, and each
    all-zero top row contributes exactly l(0)."""
    zero_rows = mat.n - mat.nonzero_top_rows()
    return (2 * mat.n + zero_rows) * loss.at_zero


def certificate_point(mat: ErmMatrixInstance) -> tuple[Fraction, ...]:
    E = certificate_exponent(mat.T)
    return (Fraction(mat.n) ** E,) * mat.n


def certificate_value(mat: ErmMatrixInstance, loss: NiceLoss,
                      bits: int = DEFAULT_BITS) -> Interval:
    alpha = certificate_point(mat)
    if loss.kind is LossKind.HINGE:
        v = erm_objective_exact(mat, loss, alpha)
        return Interval.exact(v, bits)
    pts = [Interval.exact(a, bits) for a in alpha]
    return erm_objective_interval(mat, loss, pts, bits)


# -- exact epigraph LP for the hinge loss --------------------------------------

def solve_hinge_exact(mat: ErmMatrixInstance) -> tuple[Fraction, list[Fraction]]:
    """Exact ERM optimum for the hinge loss via a rational simplex method.

    min sum(xi)  s.t.  xi_i + y_i m_i . (u - w) - s_i = 1,  all vars >= 0,
    starting from the basic feasible point xi = 1 (alpha = 0); Bland's rule
    guarantees termination.
    """
    rows = len(mat.entries)
    n = mat.n
    # variable layout: u[0:n], w[n:2n], xi[2n:2n+rows], s[2n+rows:2n+2rows]
    nv = 2 * n + 2 * rows
    A = []
    for i, (row, y) in enumerate(zip(mat.entries, mat.labels)):
        r = [Fraction(0)] * nv
        for j, v in enumerate(row):
            r[j] = y * v
            r[n + j] = -y * v
        r[2 * n + i] = Fraction(1)
        r[2 * n + rows + i] = Fraction(-1)
        A.append(r)
    b = [Fraction(1)] * rows
    c = [Fraction(0)] * nv
    for i in range(rows):
        c[2 * n + i] = Fraction(1)
    basis = [2 * n + i for i in range(rows)]
    # tableau rows: basis value + coefficients (basis columns form identity)
    T = [[b[i]] + A[i][:] for i in range(rows)]
    while True:
        # reduced costs: c_j - c_B . B^-1 A_j ; tableau already reduced
        duals = {basis[i]: i for i in range(rows)}
        entering = -1
        for j in range(nv):
            if j in duals:
                continue
            red = c[j] - sum(c[basis[i]] * T[i][1 + j] for i in range(rows))
            if red < 0:
                entering = j
                break  # Bland: smallest index
        if entering < 0:
            break
        leaving, best = -1, None
        for i in range(rows):
            coef = T[i][1 + entering]
            if coef > 0:
                ratio = T[i][0] / coef
                if best is None or ratio < best or \
                        (ratio == best and basis[i] < basis[leaving]):
                    best, leaving = ratio, i
        if leaving < 0:
            raise ValidationError("unbounded hinge LP; construction invariant broken")
        piv = T[leaving][1 + entering]
        T[leaving] = [v / piv for v in T[leaving]]
        for i in range(rows):
            if i != leaving and T[i][1 + entering] != 0:
                f = T[i][1 + entering]
                T[i] = [vi - f * vl for vi, vl in zip(T[i], T[leaving])]
        basis[leaving] = entering
    value = sum(c[basis[i]] * T[i][0] for i in range(rows))
    x = [Fraction(0)] * nv
    for i in range(rows):
        x[basis[i]] = T[i][0]
    alpha = [x[j] - x[n + j] for j in range(n)]
    return value, alpha


# -- damped Newton for the logistic loss ---------------------------------------

def solve_logistic_upper_bound(mat: ErmMatrixInstance, bits: int,
                               max_iters: int = 200) -> tuple[Interval, list[Interval]]:
    """Upper bound on the logistic ERM optimum: damped Newton steps in mpfr
    followed by a certified interval evaluation at the final iterate."""
    ctx = gmpy2.context(precision=bits)
    n = mat.n
    rows_m = [[ctx.div(mpfr(r.numerator), mpfr(r.denominator)) for r in row]
              for row in mat.entries]
    ys = [mpfr(y) for y in mat.labels]
    alpha = [mpfr(0, precision=bits)] * n
    ln2 = ctx.log(mpfr(2))

    def f_grad():
        g = [mpfr(0, precision=bits)] * n
        val = mpfr(0, precision=bits)
        for row, y in zip(rows_m, ys):
            z = mpfr(0, precision=bits)
            for j in range(n):
                if row[j] != 0:
                    z = ctx.add(z, ctx.mul(row[j], alpha[j]))
            yz = ctx.mul(y, z)
            val = ctx.add(val, ctx.div(ctx.log1p(ctx.exp(ctx.sub(mpfr(0), yz))), ln2))
            sig = ctx.div(mpfr(1), ctx.add(mpfr(1), ctx.exp(yz)))
            coef = ctx.div(ctx.mul(y, sig), ln2)
            for j in range(n):
                if row[j] != 0:
                    g[j] = ctx.sub(g[j], ctx.mul(coef, row[j]))
        return val, g

    val, g = f_grad()
    step = mpfr("1.0")
    for _ in range(max_iters):
        trial = [ctx.sub(alpha[j], ctx.mul(step, g[j])) for j in range(n)]
        saved = alpha
        alpha = trial
        val2, g2 = f_grad()
        if val2 < val:
            val, g = val2, g2
            step = ctx.mul(step, mpfr(2))
        else:
            alpha = saved
            step = ctx.div(step, mpfr(2))
            if step < mpfr("1e-30"):
                break
    pts = [Interval.point(a) for a in alpha]
    return erm_objective_interval(mat, NiceLoss(LossKind.LOGISTIC), pts, bits), pts


@dataclass
class NnDetails:
    min_enclosure: Interval
    certificate: Interval
    structural_lower: Fraction
    nonzero_rows: int
    bits: int


def nn_distinguisher(inst: VectorPairInstance, loss: str | LossKind = LossKind.HINGE,
                     T: int = DEFAULT_T, bits: int = 256,
                     use_solver: bool = True) -> ReductionVerdict:
    """Decide OVP from a certified enclosure of the ERM optimum."""
    loss = NiceLoss(LossKind(loss))
    t0 = time.perf_counter()
    mat = build_layer_matrix(inst, T)
    n = mat.n
    l0 = loss.at_zero
    cert = certificate_value(mat, loss, bits)
    lower = erm_structural_lower_bound(mat, loss)
    min_hi = cert.hi
    if use_solver:
        if loss.kind is LossKind.HINGE:
            opt, _ = solve_hinge_exact(mat)
            if opt < lower:
                raise ValidationError(
                    f"solver optimum {opt} below certified lower bound {lower}")
            if Interval.exact(opt, bits).lo > cert.hi:
                pass  # certificate is the better (smaller) upper bound
            min_hi = min(min_hi, Interval.exact(opt, bits).hi)
        else:
            up, _ = solve_logistic_upper_bound(mat, bits)
            if up.hi < float(lower):
                raise ValidationError("logistic upper bound below certified lower bound")
            min_hi = min(min_hi, up.hi)
    enclosure = Interval(Interval.exact(lower, bits).lo, min_hi)
    # statistic = 3n l(0) - optimum, so YES (small optimum) is the large side
    full = Interval.exact(3 * n * l0, bits)
    stat = full.sub(enclosure, bits)
    threshold = Interval(Interval.exact(l0 / 4, bits).lo,
                         Interval.exact(l0 / 2, bits).hi)
    name = f"nn_{loss.kind.value}"
    details = NnDetails(min_enclosure=enclosure, certificate=cert,
                        structural_lower=lower,
                        nonzero_rows=mat.nonzero_top_rows(), bits=bits)
    elapsed = time.perf_counter() - t0
    if stat.lo >= threshold.hi:
        return ReductionVerdict(Answer.YES, stat, threshold, name, bits, elapsed, details)
    if stat.hi <= threshold.lo:
        return ReductionVerdict(Answer.NO, stat, threshold, name, bits, elapsed, details)
    return ReductionVerdict(Answer.UNDECIDABLE, stat, threshold, name, bits,
                            elapsed, details)


# -- gradient-at-zero gadget ----------------------------------------------------

def gadget_unit(kind: ActivationKind, ip: int, n: int, bits: int) -> Interval:
    """Hidden-unit response to an integer inner product: 1 at ip = 0 and 0
    beyond (ReLU), or 1/2 at ip = 0 and <= n^-10 beyond (sigmoid)."""
    if kind is ActivationKind.RELU:
        return activation_value(kind, Fraction(1 - 2 * ip), bits)
    # sigmoid(-10 ln(n) * ip)
    ln_n = interval_ln(Interval.exact(n, bits), bits)
    arg = ln_n.scale_int(-10 * ip, bits)
    e = interval_exp(arg.neg(), bits)
    return Interval.one(bits).div(Interval.one(bits).add(e, bits), bits)


def gadget_matrix(inst: VectorPairInstance, gadget: str | ActivationKind,
                  bits: int = DEFAULT_BITS) -> list[list[Interval]]:
    """n x m matrix of hidden-unit responses G_ij = S(gadget(a_i . b_j))."""
    kind = ActivationKind(gadget)
    n = max(inst.n, 2)
    return [[gadget_unit(kind, dot(a, b), n, bits) for b in inst.B]
            for a in inst.A]


def gadget_objective(G: list[list[Interval]], loss: NiceLoss,
                     alpha: list[Interval], bits: int) -> Interval:
    """sum_i l(G_i . alpha): the single-layer ERM objective of the gadget."""
    terms = []
    for row in G:
        z = interval_sum((g.mul(a, bits) for g, a in zip(row, alpha)), bits)
        terms.append(loss.value(z, bits))
    return interval_sum(terms, bits)


def loss_gradient_at_zero(inst: VectorPairInstance,
                          loss: str | LossKind = LossKind.HINGE,
                          gadget: str | ActivationKind = ActivationKind.RELU,
                          bits: int = DEFAULT_BITS) -> Interval:
    """Entry sum of the ERM gradient at alpha = 0: l'(0) times the
    gadget-weighted count of orthogonal pairs."""
    if inst.kind is not InstanceKind.OVP:
        raise ValidationError("gradient gadget takes an OVP instance")
    loss = NiceLoss(LossKind(loss))
    gadget = ActivationKind(gadget)
    n = max(inst.n, 2)
    units = [gadget_unit(gadget, dot(a, b), n, bits)
             for a in inst.A for b in inst.B]
    total = interval_sum(units, bits)
    return loss.slope_at_zero(bits).mul(total, bits)


def gradient_distinguisher(inst: VectorPairInstance,
                           loss: str | LossKind = LossKind.HINGE,
                           gadget: str | ActivationKind = ActivationKind.RELU,
                           bits: int = 256) -> ReductionVerdict:
    """Decide OVP from |entry sum of the gradient| at the zero final layer.

    One orthogonal pair forces |sum| >= |l'(0)|/2; with no pair the sum is 0
    (ReLU gadget) or at most n^2 * n^-10 |l'(0)| (sigmoid gadget)."""
    loss_obj = NiceLoss(LossKind(loss))
    gname = ActivationKind(gadget).value
    t0 = time.perf_counter()
    grad = loss_gradient_at_zero(inst, loss, gadget, bits)
    stat = grad.abs()
    slope = loss_obj.slope_at_zero(bits).abs()
    quarter = slope.mul(Interval.exact(Fraction(1, 4), bits), bits)
    three_eighth = slope.mul(Interval.exact(Fraction(3, 8), bits), bits)
    threshold = Interval(quarter.lo, three_eighth.hi)
    name = f"grad_{gname}"
    elapsed = time.perf_counter() - t0
    bits_used = bits
    if stat.lo >= threshold.hi:
        return ReductionVerdict(Answer.YES, stat, threshold, name, bits_used, elapsed)
    if stat.hi <= threshold.lo:
        return ReductionVerdict(Answer.NO, stat, threshold, name, bits_used, elapsed)
    return ReductionVerdict(Answer.UNDECIDABLE, stat, threshold, name, bits_used, elapsed)
