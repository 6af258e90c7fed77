"""Brute-force ground-truth deciders for OVP and BHCP.

These are the reference every reduction verdict is checked against, and the
baseline for the scaling benchmark.  Python integers give word-parallel
popcounts, so the quadratic scan is an honest baseline rather than a strawman.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .instances import BitVector, InstanceKind, ValidationError, VectorPairInstance


@dataclass(frozen=True)
class OracleVerdict:
    has_pair: bool
    witness: Optional[tuple[int, int]]
    extremal_value: int

    def __post_init__(self):
        if self.has_pair and self.witness is None:
            raise ValueError("YES verdict requires a witness")


def hamming(a: BitVector, b: BitVector) -> int:
    if a.d != b.d:
        raise ValidationError(f"dimension mismatch {a.d} != {b.d}")
    return (a.word ^ b.word).bit_count()


def dot(a: BitVector, b: BitVector) -> int:
    if a.d != b.d:
        raise ValidationError(f"dimension mismatch {a.d} != {b.d}")
    return (a.word & b.word).bit_count()


def solve_ovp_raw(A: Sequence[BitVector], B: Sequence[BitVector]) -> OracleVerdict:
    count = 0
    witness = None
    for i, a in enumerate(A):
        aw = a.word
        for j, b in enumerate(B):
            if (aw & b.word).bit_count() == 0:
                count += 1
                if witness is None:
                    witness = (i, j)
    return OracleVerdict(has_pair=count > 0, witness=witness, extremal_value=count)


def solve_ovp(inst: VectorPairInstance) -> OracleVerdict:
    if inst.kind is not InstanceKind.OVP:
        raise ValidationError(f"expected OVP instance, got {inst.kind.value}")
    return solve_ovp_raw(inst.A, inst.B)


def solve_bhcp_raw(A: Sequence[BitVector], B: Sequence[BitVector], t: int) -> OracleVerdict:
    best = None
    witness = None
    for i, a in enumerate(A):
        aw = a.word
        for j, b in enumerate(B):
            h = (aw ^ b.word).bit_count()
            if best is None or h < best:
                best = h
                witness = (i, j)
    if best is None:
        raise ValidationError("empty instance")
    return OracleVerdict(has_pair=best < t, witness=witness if best < t else None,
                         extremal_value=best)


def solve_bhcp(inst: VectorPairInstance) -> OracleVerdict:
    if inst.kind is not InstanceKind.BHCP:
        raise ValidationError(f"expected BHCP instance, got {inst.kind.value}")
    return solve_bhcp_raw(inst.A, inst.B, inst.t)


def solve(inst: VectorPairInstance) -> OracleVerdict:
    if inst.kind is InstanceKind.OVP:
        return solve_ovp(inst)
    return solve_bhcp(inst)
