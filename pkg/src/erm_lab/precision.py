"""Certified extended-precision interval arithmetic.

Every scalar quantity that feeds a YES/NO decision in this package is carried
as an ``Interval``: a pair of MPFR floats (via gmpy2) with the guarantee that
the exact real value lies between them.  Endpoints are produced with directed
rounding (lower endpoints round down, upper endpoints round up), so the
containment guarantee survives arbitrarily long computations.

Decisions against a threshold are made only when the statistic's interval
strictly clears the threshold's interval; otherwise the computation is
replayed at doubled precision (``escalate_precision``) until it resolves or a
configured cap is reached, in which case the outcome is ``UNDECIDABLE``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

import gmpy2
from gmpy2 import mpfr

MIN_BITS = 64
DEFAULT_BITS = 128
DEFAULT_PRECISION_CAP = 1_048_576
PRECISION_CAP_ENV = "ERM_LAB_PRECISION_CAP"


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class PrecisionError(RuntimeError):
    """Precision budget exhausted or invalid precision request."""


def precision_cap() -> int:
    """Active precision cap in bits (env override via ERM_LAB_PRECISION_CAP)."""
    raw = os.environ.get(PRECISION_CAP_ENV)
    if raw is None:
        return DEFAULT_PRECISION_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise PrecisionError(f"bad {PRECISION_CAP_ENV}={raw!r}") from exc
    if cap < MIN_BITS:
        raise PrecisionError(f"{PRECISION_CAP_ENV} must be >= {MIN_BITS}")
    return cap


@lru_cache(maxsize=None)
def _down(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundDown)


@lru_cache(maxsize=None)
def _up(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundUp)


def _check_bits(bits: int) -> int:
    if bits < MIN_BITS:
        raise PrecisionError(f"precision_bits must be >= {MIN_BITS}, got {bits}")
    return bits


Number = Union[int, Fraction, mpfr]


def exact_neg(x: mpfr) -> mpfr:
    """Negation at the operand's own precision.

    Python operators on mpfr round to the *active* thread context (53 bits by
    default), so bare ``-x`` silently truncates extended-precision values.
    """
    return gmpy2.context(precision=x.precision).minus(x)


def exact_abs(x: mpfr) -> mpfr:
    return x if x >= 0 else exact_neg(x)


def _mpfr_pair(value: Number, bits: int) -> tuple[mpfr, mpfr]:
    """Directed-rounded (lo, hi) representation of an exact value."""
    if isinstance(value, mpfr):
        return value, value
    zero_d = mpfr(0, precision=bits)
    if isinstance(value, int):
        return _down(bits).add(zero_d, value), _up(bits).add(zero_d, value)
    if isinstance(value, Fraction):
        q = gmpy2.mpq(value.numerator, value.denominator)
        return _down(bits).add(zero_d, q), _up(bits).add(zero_d, q)
    raise TypeError(f"cannot convert {type(value).__name__} exactly; use mpfr/int/Fraction")


class Interval:
    """Closed interval [lo, hi] certified to contain an exact real value."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: mpfr, hi: mpfr):
        if not isinstance(lo, mpfr) or not isinstance(hi, mpfr):
            raise TypeError("Interval endpoints must be mpfr")
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi):
            raise DomainError("NaN endpoint")
        if lo > hi:
            raise DomainError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- construction -----------------------------------------------------

    @staticmethod
    def exact(value: Number, bits: int = DEFAULT_BITS) -> "Interval":
        lo, hi = _mpfr_pair(value, _check_bits(bits))
        return Interval(lo, hi)

    @staticmethod
    def point(value: mpfr) -> "Interval":
        return Interval(value, value)

    @staticmethod
    def zero(bits: int = DEFAULT_BITS) -> "Interval":
        z = mpfr(0, precision=_check_bits(bits))
        return Interval(z, z)

    @staticmethod
    def one(bits: int = DEFAULT_BITS) -> "Interval":
        o = mpfr(1, precision=_check_bits(bits))
        return Interval(o, o)

    # -- inspection --------------------------------------------------------

    @property
    def bits(self) -> int:
        return max(self.lo.precision, self.hi.precision)

    def width(self) -> mpfr:
        return _up(self.bits).sub(self.hi, self.lo)

    def mid(self) -> mpfr:
        ctx = gmpy2.context(precision=self.bits)
        return ctx.div(ctx.add(self.lo, self.hi), mpfr(2))

    def mag_hi(self) -> mpfr:
        """Upper bound on |x| over the interval."""
        return max(exact_abs(self.lo), exact_abs(self.hi))

    def contains(self, value: Number) -> bool:
        if isinstance(value, Fraction):
            value = gmpy2.mpq(value.numerator, value.denominator)
        return self.lo <= value <= self.hi

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def strictly_above(self, other: "Interval") -> bool:
        return self.lo > other.hi

    def strictly_below(self, other: "Interval") -> bool:
        return self.hi < other.lo

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- arithmetic ---------------------------------------------------------

    def _bits_with(self, other: "Interval | None" = None) -> int:
        b = self.bits
        if other is not None:
            b = max(b, other.bits)
        return b

    def add(self, other: "Interval", bits: int | None = None) -> "Interval":
        b = bits or self._bits_with(other)
        return Interval(_down(b).add(self.lo, other.lo), _up(b).add(self.hi, other.hi))

    def sub(self, other: "Interval", bits: int | None = None) -> "Interval":
        b = bits or self._bits_with(other)
        return Interval(_down(b).sub(self.lo, other.hi), _up(b).sub(self.hi, other.lo))

    def neg(self) -> "Interval":
        return Interval(exact_neg(self.hi), exact_neg(self.lo))

    def mul(self, other: "Interval", bits: int | None = None) -> "Interval":
        b = bits or self._bits_with(other)
        d, u = _down(b), _up(b)
        cands_lo = (d.mul(self.lo, other.lo), d.mul(self.lo, other.hi),
                    d.mul(self.hi, other.lo), d.mul(self.hi, other.hi))
        cands_hi = (u.mul(self.lo, other.lo), u.mul(self.lo, other.hi),
                    u.mul(self.hi, other.lo), u.mul(self.hi, other.hi))
        return Interval(min(cands_lo), max(cands_hi))

    def div(self, other: "Interval", bits: int | None = None) -> "Interval":
        if other.lo <= 0 <= other.hi:
            raise DomainError("division by interval containing zero")
        b = bits or self._bits_with(other)
        d, u = _down(b), _up(b)
        cands_lo = (d.div(self.lo, other.lo), d.div(self.lo, other.hi),
                    d.div(self.hi, other.lo), d.div(self.hi, other.hi))
        cands_hi = (u.div(self.lo, other.lo), u.div(self.lo, other.hi),
                    u.div(self.hi, other.lo), u.div(self.hi, other.hi))
        return Interval(min(cands_lo), max(cands_hi))

    def scale_int(self, k: int, bits: int | None = None) -> "Interval":
        return self.mul(Interval.exact(k, bits or self.bits), bits)

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return self.neg()
        return Interval(mpfr(0, precision=self.bits), self.mag_hi())

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    __add__ = add
    __sub__ = sub
    __mul__ = mul
    __truediv__ = div
    __neg__ = neg


def interval_arith(op: str, x: Interval, y: Interval, bits: int | None = None) -> Interval:
    """Dispatch form of the basic interval operations."""
    if op == "add":
        return x.add(y, bits)
    if op == "sub":
        return x.sub(y, bits)
    if op == "mul":
        return x.mul(y, bits)
    if op == "div":
        return x.div(y, bits)
    if op == "neg":
        return x.neg()
    raise ValueError(f"unknown op {op!r}")


# Saturation value for exp overflow: certified upper endpoint beyond any
# quantity this package ever compares against.
def _huge(bits: int) -> mpfr:
    return _up(bits).exp(mpfr(2**30))


def interval_exp(x: Interval, bits: int | None = None) -> Interval:
    b = _check_bits(bits or x.bits)
    lo = _down(b).exp(x.lo)
    hi = _up(b).exp(x.hi)
    if gmpy2.is_infinite(hi):
        hi = _huge(b)
    return Interval(lo, hi)


def interval_ln(x: Interval, bits: int | None = None) -> Interval:
    if x.lo <= 0:
        raise DomainError("ln of non-positive interval")
    b = _check_bits(bits or x.bits)
    return Interval(_down(b).log(x.lo), _up(b).log(x.hi))


def interval_sqrt(x: Interval, bits: int | None = None) -> Interval:
    if x.lo < 0:
        raise DomainError("sqrt of negative interval")
    b = _check_bits(bits or x.bits)
    return Interval(_down(b).sqrt(x.lo), _up(b).sqrt(x.hi))


def interval_pow_int(x: Interval, k: int, bits: int | None = None) -> Interval:
    """x**k for integer k >= 0 by repeated interval multiplication."""
    if k < 0:
        raise DomainError("negative exponent; divide explicitly")
    b = bits or x.bits
    acc = Interval.one(b)
    base = x
    while k:
        if k & 1:
            acc = acc.mul(base, b)
        k >>= 1
        if k:
            base = base.mul(base, b)
    return acc


def interval_sum(items, bits: int | None = None) -> Interval:
    """Outward-rounded sum of an iterable of intervals."""
    items = list(items)
    if not items:
        return Interval.zero(bits or DEFAULT_BITS)
    b = bits or max(it.bits for it in items)
    d, u = _down(b), _up(b)
    lo = mpfr(0, precision=b)
    hi = mpfr(0, precision=b)
    for it in items:
        lo = d.add(lo, it.lo)
        hi = u.add(hi, it.hi)
    return Interval(lo, hi)


# -- certified threshold decisions -------------------------------------------


class Outcome(Enum):
    ABOVE = "ABOVE"
    BELOW = "BELOW"
    UNDECIDABLE = "UNDECIDABLE"


@dataclass(frozen=True)
class CertifiedOutcome:
    outcome: Outcome
    statistic: Interval
    threshold: Interval
    bits_used: int
    escalations: int


def precision_ladder(start_bits: int, cap: int | None = None):
    """Yield doubling precisions from start_bits up to the active cap."""
    cap = cap or precision_cap()
    bits = max(_check_bits(start_bits), MIN_BITS)
    while True:
        yield min(bits, cap)
        if bits >= cap:
            return
        bits *= 2


def escalate_precision(
    computation: Callable[[int], Interval],
    decision: "Interval | Callable[[int], Interval]",
    start_bits: int = DEFAULT_BITS,
    cap: int | None = None,
) -> CertifiedOutcome:
    """Replay a deterministic computation at doubling precision until its
    interval strictly clears the threshold, or the precision cap is hit."""
    escalations = -1
    stat = thr = None
    for bits in precision_ladder(start_bits, cap):
        escalations += 1
        stat = computation(bits)
        thr = decision(bits) if callable(decision) else decision
        if stat.strictly_above(thr):
            return CertifiedOutcome(Outcome.ABOVE, stat, thr, bits, escalations)
        if stat.strictly_below(thr):
            return CertifiedOutcome(Outcome.BELOW, stat, thr, bits, escalations)
    return CertifiedOutcome(Outcome.UNDECIDABLE, stat, thr, stat.bits, escalations)


def decimal_str(x: mpfr, digits: int = 25) -> str:
    """Decimal rendering (round-to-nearest) used for report serialization."""
    if gmpy2.is_zero(x):
        return "0"
    mantissa, exp10, _ = x.digits(10, digits)
    sign = "-" if mantissa.startswith("-") else ""
    mantissa = mantissa.lstrip("-")
    return f"{sign}{mantissa[0]}.{mantissa[1:]}e{exp10 - 1:+d}"
