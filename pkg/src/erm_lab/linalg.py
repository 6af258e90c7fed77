"""Small dense linear algebra over intervals and mpfr midpoints.

All matrices here are tiny (at most a few hundred rows), so everything is
plain dense lists.  Midpoint factorizations run in round-to-nearest mpfr;
certified enclosures come from interval residuals plus norm bounds.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from .precision import (Interval, PrecisionError, _down, _up, exact_abs,
                        interval_sum)

IMatrix = tuple[tuple[Interval, ...], ...]


def imat_from_lists(rows) -> IMatrix:
    return tuple(tuple(row) for row in rows)


def imat_identity(n: int, bits: int) -> IMatrix:
    one = Interval.one(bits)
    zero = Interval.zero(bits)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def imat_add(A: IMatrix, B: IMatrix, bits: int) -> IMatrix:
    return tuple(tuple(a.add(b, bits) for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def imat_sub(A: IMatrix, B: IMatrix, bits: int) -> IMatrix:
    return tuple(tuple(a.sub(b, bits) for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def imat_mul(A: IMatrix, B: IMatrix, bits: int) -> IMatrix:
    n, k = len(A), len(B)
    m = len(B[0]) if k else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            row.append(interval_sum((A[i][p].mul(B[p][j], bits) for p in range(k)), bits))
        out.append(tuple(row))
    return tuple(out)


def imat_vec(A: IMatrix, x: list[Interval], bits: int) -> list[Interval]:
    return [interval_sum((a.mul(v, bits) for a, v in zip(row, x)), bits) for row in A]


def imat_entry_sum(A: IMatrix, bits: int) -> Interval:
    return interval_sum((e for row in A for e in row), bits)


def imat_mid(A: IMatrix, bits: int) -> list[list[mpfr]]:
    ctx = gmpy2.context(precision=bits)
    return [[ctx.div(ctx.add(e.lo, e.hi), mpfr(2)) for e in row] for row in A]


def norm_inf_hi(A: IMatrix) -> mpfr:
    """Certified upper bound on the max row sum of |entries|."""
    best = mpfr(0)
    for row in A:
        u = _up(max(e.bits for e in row))
        s = mpfr(0)
        for e in row:
            s = u.add(s, e.mag_hi())
        best = max(best, s)
    return best


# -- midpoint (round-to-nearest) solvers --------------------------------------

def mid_cholesky(M: list[list[mpfr]], bits: int) -> list[list[mpfr]]:
    """Lower Cholesky factor of a (numerically) SPD matrix."""
    ctx = gmpy2.context(precision=bits)
    n = len(M)
    L = [[mpfr(0, precision=bits)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = M[i][j]
            for k in range(j):
                s = ctx.sub(s, ctx.mul(L[i][k], L[j][k]))
            if i == j:
                if s <= 0:
                    raise PrecisionError("matrix not positive definite at working precision")
                L[i][j] = ctx.sqrt(s)
            else:
                L[i][j] = ctx.div(s, L[j][j])
    return L


def cholesky_solve(L: list[list[mpfr]], b: list[mpfr], bits: int) -> list[mpfr]:
    ctx = gmpy2.context(precision=bits)
    n = len(L)
    y = [mpfr(0)] * n
    for i in range(n):
        s = b[i]
        for k in range(i):
            s = ctx.sub(s, ctx.mul(L[i][k], y[k]))
        y[i] = ctx.div(s, L[i][i])
    x = [mpfr(0)] * n
    for i in reversed(range(n)):
        s = y[i]
        for k in range(i + 1, n):
            s = ctx.sub(s, ctx.mul(L[k][i], x[k]))
        x[i] = ctx.div(s, L[i][i])
    return x


def mid_gauss_solve(M: list[list[mpfr]], b: list[mpfr], bits: int) -> list[mpfr]:
    """Partial-pivot Gaussian elimination in mpfr."""
    ctx = gmpy2.context(precision=bits)
    n = len(M)
    A = [row[:] + [b[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: exact_abs(A[r][col]))
        if A[piv][col] == 0:
            raise PrecisionError("singular matrix at working precision")
        A[col], A[piv] = A[piv], A[col]
        for r in range(col + 1, n):
            f = ctx.div(A[r][col], A[col][col])
            if f == 0:
                continue
            for c in range(col, n + 1):
                A[r][c] = ctx.sub(A[r][c], ctx.mul(f, A[col][c]))
    x = [mpfr(0)] * n
    for i in reversed(range(n)):
        s = A[i][n]
        for c in range(i + 1, n):
            s = ctx.sub(s, ctx.mul(A[i][c], x[c]))
        x[i] = ctx.div(s, A[i][i])
    return x


def mid_inverse(M: list[list[mpfr]], bits: int) -> list[list[mpfr]]:
    n = len(M)
    cols = []
    for j in range(n):
        e = [mpfr(1) if i == j else mpfr(0) for i in range(n)]
        cols.append(mid_gauss_solve(M, e, bits))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def enclose_inverse(A: IMatrix, bits: int) -> IMatrix:
    """Certified entrywise enclosure of A^{-1}.

    Uses an approximate midpoint inverse R and the Neumann bound
    |A^{-1} - R|_ij <= rho/(1-rho) * max|R| with rho = |I - R A|_inf.
    """
    n = len(A)
    R = mid_inverse(imat_mid(A, bits), bits)
    Ri = imat_from_lists([[Interval.point(v) for v in row] for row in R])
    E = imat_sub(imat_identity(n, bits), imat_mul(Ri, A, bits), bits)
    rho = norm_inf_hi(E)
    if rho >= 1:
        raise PrecisionError("inverse enclosure failed: residual norm >= 1 "
                             "(matrix too ill-conditioned at this precision)")
    u = _up(bits)
    maxR = max(exact_abs(v) for row in R for v in row)
    err = u.mul(u.div(rho, u.sub(mpfr(1), rho)), maxR)
    d = _down(bits)
    return tuple(tuple(Interval(d.sub(R[i][j], err), u.add(R[i][j], err))
                       for j in range(n)) for i in range(n))


def overlap_entrywise(A: IMatrix, B: IMatrix) -> bool:
    return all(a.overlaps(b) for ra, rb in zip(A, B) for a, b in zip(ra, rb))
