"""Gaussian kernel evaluation and Gram matrices with certified interval entries.

For binary vectors the squared Euclidean distance equals the Hamming distance,
an exact integer, so every kernel value is exp(-C*h) for a small set of
integers h.  Values are cached per (bandwidth, precision, h), which makes Gram
construction cheap even at tens of thousands of bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .instances import BitVector, ValidationError
from .oracles import hamming
from .precision import (DEFAULT_BITS, Interval, interval_exp, interval_ln,
                        interval_sum)


@dataclass(frozen=True)
class KernelParams:
    """Bandwidth C = multiplier * ln(n_ref)."""

    multiplier: Fraction = Fraction(100)
    n_ref: int = 2

    def __post_init__(self):
        if self.multiplier <= 0:
            raise ValidationError("multiplier must be positive")
        if self.n_ref < 2:
            raise ValidationError("n_ref must be >= 2 (C must be positive)")

    @staticmethod
    def for_instance_size(n: int, multiplier: Fraction = Fraction(100)) -> "KernelParams":
        return KernelParams(multiplier=multiplier, n_ref=max(n, 2))

    def c_interval(self, bits: int = DEFAULT_BITS) -> Interval:
        return _c_interval_cached(self.multiplier, self.n_ref, bits)


_C_CACHE: dict[tuple[Fraction, int, int], Interval] = {}
_K_CACHE: dict[tuple[Fraction, int, int, int], Interval] = {}


def _c_interval_cached(multiplier: Fraction, n_ref: int, bits: int) -> Interval:
    key = (multiplier, n_ref, bits)
    got = _C_CACHE.get(key)
    if got is None:
        got = Interval.exact(multiplier, bits).mul(
            interval_ln(Interval.exact(n_ref, bits)), bits)
        _C_CACHE[key] = got
    return got


def kernel_of_sqdist(sq: int, params: KernelParams, bits: int = DEFAULT_BITS) -> Interval:
    """exp(-C * sq) for an exact integer squared distance."""
    if sq == 0:
        return Interval.one(bits)
    key = (params.multiplier, params.n_ref, bits, sq)
    got = _K_CACHE.get(key)
    if got is None:
        c = params.c_interval(bits)
        got = interval_exp(c.scale_int(-sq, bits), bits)
        _K_CACHE[key] = got
    return got


def gaussian_kernel(x: BitVector, y: BitVector, params: KernelParams,
                    bits: int = DEFAULT_BITS) -> Interval:
    return kernel_of_sqdist(hamming(x, y), params, bits)


@dataclass(frozen=True)
class KernelMatrix:
    entries: tuple[tuple[Interval, ...], ...]
    rows: int
    cols: int
    params: Optional[KernelParams]
    symmetric: bool = False

    def entry(self, i: int, j: int) -> Interval:
        return self.entries[i][j]


def gram(points_rows: Sequence[BitVector], points_cols: Optional[Sequence[BitVector]],
         params: KernelParams, bits: int = DEFAULT_BITS) -> KernelMatrix:
    """Entrywise Gaussian kernel matrix; pass points_cols=None for a self-Gram."""
    self_gram = points_cols is None
    cols_pts = points_rows if self_gram else points_cols
    rows = [[None] * len(cols_pts) for _ in points_rows]
    for i, x in enumerate(points_rows):
        start = i if self_gram else 0
        for j in range(start, len(cols_pts)):
            v = gaussian_kernel(x, cols_pts[j], params, bits)
            rows[i][j] = v
            if self_gram:
                rows[j][i] = v
    return KernelMatrix(entries=tuple(tuple(r) for r in rows),
                        rows=len(points_rows), cols=len(cols_pts),
                        params=params, symmetric=self_gram)


def gram_from_sqdist(sqdist: Sequence[Sequence[int]], params: KernelParams,
                     bits: int = DEFAULT_BITS, symmetric: bool = False) -> KernelMatrix:
    rows = tuple(tuple(kernel_of_sqdist(s, params, bits) for s in row) for row in sqdist)
    return KernelMatrix(entries=rows, rows=len(rows), cols=len(rows[0]) if rows else 0,
                        params=params, symmetric=symmetric)


def entry_sum(K: KernelMatrix, bits: int | None = None) -> Interval:
    return interval_sum((e for row in K.entries for e in row), bits)


def off_diagonal_sup(K: KernelMatrix):
    """Upper bound (mpfr) on |entry| over all off-diagonal positions; 0 if 1x1."""
    import gmpy2
    best = gmpy2.mpfr(0)
    for i, row in enumerate(K.entries):
        for j, e in enumerate(row):
            if i != j:
                best = max(best, e.mag_hi())
    return best


def almost_identity_check(K: KernelMatrix, eps: Interval) -> bool:
    """Off-diagonal magnitudes certified <= eps and diagonal containing 1."""
    if K.rows != K.cols:
        raise ValidationError("almost-identity check requires a square matrix")
    for i, row in enumerate(K.entries):
        for j, e in enumerate(row):
            if i == j:
                if not e.contains(1):
                    return False
            elif e.mag_hi() > eps.lo:
                return False
    return True
