"""OVP / BHCP instance representation, generation, normalization, and I/O.

Instances are pairs of sets A, B of binary vectors in dimension d.  Bit
vectors are stored as Python integers (bit i = coordinate i+1), which gives
word-parallel Hamming/dot computations for free.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional


class GenerationError(RuntimeError):
    """Requested planted instance could not be produced."""


class ValidationError(ValueError):
    """Instance violates a structural invariant."""


class ParseError(ValueError):
    """Malformed instance file; message names the offending field."""


@dataclass(frozen=True, order=True)
class BitVector:
    d: int
    word: int

    def __post_init__(self):
        if self.d <= 0:
            raise ValidationError(f"dimension must be positive, got {self.d}")
        if self.word < 0 or self.word >> self.d:
            raise ValidationError(f"word {self.word:#x} does not fit in {self.d} bits")

    @staticmethod
    def from_string(s: str, d: Optional[int] = None) -> "BitVector":
        if d is not None and len(s) != d:
            raise ValidationError(f"bitstring length {len(s)} != d={d}")
        word = 0
        for i, ch in enumerate(s):
            if ch == "1":
                word |= 1 << i
            elif ch != "0":
                raise ParseError(f"bit character {ch!r} at position {i}")
        return BitVector(len(s), word)

    def to_string(self) -> str:
        return "".join("1" if self.word >> i & 1 else "0" for i in range(self.d))

    def ones(self) -> int:
        return self.word.bit_count()

    def bit(self, i: int) -> int:
        return self.word >> i & 1

    def __iter__(self):
        return (self.word >> i & 1 for i in range(self.d))


class InstanceKind(str, Enum):
    OVP = "OVP"
    BHCP = "BHCP"


@dataclass(frozen=True)
class VectorPairInstance:
    kind: InstanceKind
    A: tuple[BitVector, ...]
    B: tuple[BitVector, ...]
    d: int
    t: Optional[int] = None
    normalized: bool = False
    seed: Optional[int] = None

    def __post_init__(self):
        for name, vecs in (("A", self.A), ("B", self.B)):
            for v in vecs:
                if v.d != self.d:
                    raise ValidationError(f"vector in {name} has dimension {v.d}, expected {self.d}")
        if self.kind is InstanceKind.BHCP:
            if self.t is None:
                raise ValidationError("BHCP instance requires threshold t")
            if not 2 <= self.t <= self.d:
                raise ValidationError(f"t={self.t} outside {{2, ..., d={self.d}}}")
        if self.normalized:
            weights = {b.ones() for b in self.B}
            if len(weights) > 1:
                raise ValidationError("normalized instance requires equal one-counts in B")
            if len(set(self.B)) != len(self.B):
                raise ValidationError("normalized instance requires distinct B vectors")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def m(self) -> int:
        return len(self.B)


def default_dimension(n: int) -> int:
    """Desk-scale stand-in for d = omega(log n)."""
    import math
    return max(4, math.ceil(math.log2(n) ** 2)) if n > 1 else 4


def default_threshold(d: int) -> int:
    """Hamming threshold used for generated BHCP suites."""
    return max(2, d // 5)


def _sample_vec(rng: random.Random, d: int) -> BitVector:
    return BitVector(d, rng.getrandbits(d))


def _sample_distinct(rng: random.Random, d: int, n: int, forbidden: set[int] = frozenset()) -> list[BitVector]:
    if n + len(forbidden) > 2 ** d:
        raise GenerationError(f"cannot draw {n} distinct vectors in dimension {d}")
    out: list[BitVector] = []
    seen = set(forbidden)
    while len(out) < n:
        v = _sample_vec(rng, d)
        if v.word not in seen:
            seen.add(v.word)
            out.append(v)
    return out


def _flip_coords(v: BitVector, coords: list[int]) -> BitVector:
    word = v.word
    for c in coords:
        word ^= 1 << c
    return BitVector(v.d, word)


MAX_RETRIES = 1000


def _generate_ovp(rng: random.Random, n: int, d: int, planted: str) -> tuple[list[BitVector], list[BitVector]]:
    from . import oracles

    for _ in range(MAX_RETRIES):
        if planted == "no":
            # Force every dot product >= 1 by switching on coordinate 1
            # everywhere; the oracle re-verifies below.
            A = _sample_distinct(rng, d, n)
            B = _sample_distinct(rng, d, n)
            A = [BitVector(d, v.word | 1) for v in A]
            B = [BitVector(d, v.word | 1) for v in B]
            if len({v.word for v in A}) < n or len({v.word for v in B}) < n:
                continue
        elif planted == "yes":
            A = _sample_distinct(rng, d, n)
            B = _sample_distinct(rng, d, n)
            j = rng.randrange(n)
            # Replace one a by a vector supported on the complement of b_j.
            mask = ((1 << d) - 1) ^ B[j].word
            a_new = BitVector(d, rng.getrandbits(d) & mask)
            i = rng.randrange(n)
            A = list(A)
            A[i] = a_new
            if len({v.word for v in A}) < n:
                continue
        else:
            A = _sample_distinct(rng, d, n)
            B = _sample_distinct(rng, d, n)
        verdict = oracles.solve_ovp_raw(A, B)
        if planted == "yes" and not verdict.has_pair:
            continue
        if planted == "no" and verdict.has_pair:
            continue
        return A, B
    raise GenerationError(f"no OVP instance with planted={planted} after {MAX_RETRIES} retries")


def _bhcp_no_sets(rng: random.Random, n: int, d: int, t: int) -> tuple[list[BitVector], list[BitVector]] | None:
    from . import oracles

    B = _sample_distinct(rng, d, n)
    if d <= 18:
        valid = [w for w in range(2 ** d)
                 if all((w ^ b.word).bit_count() >= t for b in B)]
        if len(valid) < n:
            return None
        A = [BitVector(d, w) for w in rng.sample(valid, n)]
        return A, B
    A: list[BitVector] = []
    seen: set[int] = set()
    for _ in range(n):
        for _ in range(64):
            cand = _sample_vec(rng, d)
            if cand.word in seen:
                continue
            if all(oracles.hamming(cand, b) >= t for b in B):
                A.append(cand)
                seen.add(cand.word)
                break
        else:
            return None
    return A, B


def _generate_bhcp(rng: random.Random, n: int, d: int, t: int, planted: str) -> tuple[list[BitVector], list[BitVector]]:
    from . import oracles

    for _ in range(MAX_RETRIES):
        if planted == "no":
            sets = _bhcp_no_sets(rng, n, d, t)
            if sets is None:
                continue
            A, B = sets
        else:
            # All 2n vectors pairwise distinct so downstream kernel matrices
            # stay invertible (cross distances >= 1).
            allv = _sample_distinct(rng, d, 2 * n)
            A, B = allv[:n], allv[n:]
            if planted == "yes":
                i, j = rng.randrange(n), rng.randrange(n)
                coords = rng.sample(range(d), t - 1)
                a_new = _flip_coords(B[j], coords)
                others = {v.word for k, v in enumerate(A) if k != i} | {v.word for v in B}
                if a_new.word in others:
                    continue
                A = list(A)
                A[i] = a_new
        if len({v.word for v in A} | {v.word for v in B}) < 2 * n:
            continue
        verdict = oracles.solve_bhcp_raw(A, B, t)
        if planted == "yes" and not verdict.has_pair:
            continue
        if planted == "no" and verdict.has_pair:
            continue
        return A, B
    raise GenerationError(f"no BHCP instance with planted={planted}, n={n}, d={d}, t={t} "
                          f"after {MAX_RETRIES} retries")


def generate(kind: InstanceKind | str, n: int, d: int, t: Optional[int] = None,
             planted: str = "random", seed: Optional[int] = None) -> VectorPairInstance:
    """Generate an instance with a guaranteed (oracle-verified) ground truth."""
    kind = InstanceKind(kind)
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if planted not in ("yes", "no", "random"):
        raise ValidationError(f"planted must be yes/no/random, got {planted!r}")
    if kind is InstanceKind.BHCP:
        if t is None or not 2 <= t <= d:
            raise ValidationError(f"BHCP requires t in {{2, ..., {d}}}, got {t}")
    rng = random.Random(seed)
    if kind is InstanceKind.OVP:
        A, B = _generate_ovp(rng, n, d, planted)
        t_out = None
    else:
        A, B = _generate_bhcp(rng, n, d, t, planted)
        t_out = t
    return VectorPairInstance(kind=kind, A=tuple(A), B=tuple(B), d=d, t=t_out,
                              normalized=False, seed=seed)


def normalize(inst: VectorPairInstance) -> VectorPairInstance:
    """Pad to dimension 2d so every B vector has exactly d ones.

    A vectors get d zero coordinates; B vectors get their missing ones in the
    lowest-index appended slots.  Dot products a^T b are unchanged.
    """
    d = inst.d
    if len(set(inst.B)) != len(inst.B):
        raise ValidationError("duplicate vectors in B; normalization requires distinct B")
    new_A = tuple(BitVector(2 * d, a.word) for a in inst.A)
    new_B = []
    for b in inst.B:
        pad_ones = d - b.ones()
        word = b.word | (((1 << pad_ones) - 1) << d)
        new_B.append(BitVector(2 * d, word))
    if len({b.word for b in new_B}) != len(new_B):
        raise ValidationError("duplicate vectors in B after padding")
    return replace(inst, A=new_A, B=tuple(new_B), d=2 * d, normalized=True)


# -- serialization ------------------------------------------------------------

def instance_to_dict(inst: VectorPairInstance) -> dict:
    return {
        "kind": inst.kind.value,
        "n": inst.n,
        "m": inst.m,
        "d": inst.d,
        "t": inst.t,
        "normalized": inst.normalized,
        "seed": inst.seed,
        "A": [a.to_string() for a in inst.A],
        "B": [b.to_string() for b in inst.B],
    }


def instance_from_dict(data: dict) -> VectorPairInstance:
    for key in ("kind", "n", "m", "d", "normalized", "A", "B"):
        if key not in data:
            raise ParseError(f"missing field {key!r}")
    try:
        kind = InstanceKind(data["kind"])
    except ValueError:
        raise ParseError(f"kind: unknown value {data['kind']!r}") from None
    d = data["d"]
    if not isinstance(d, int) or d < 1:
        raise ParseError(f"d: expected positive integer, got {d!r}")
    vecs = {}
    for name in ("A", "B"):
        out = []
        for i, s in enumerate(data[name]):
            if len(s) != d:
                raise ParseError(f"{name}[{i}]: length {len(s)} != d={d}")
            out.append(BitVector.from_string(s))
        vecs[name] = tuple(out)
    if len(vecs["A"]) != data["n"]:
        raise ParseError(f"n: header says {data['n']}, A has {len(vecs['A'])} vectors")
    if len(vecs["B"]) != data["m"]:
        raise ParseError(f"m: header says {data['m']}, B has {len(vecs['B'])} vectors")
    try:
        return VectorPairInstance(kind=kind, A=vecs["A"], B=vecs["B"], d=d,
                                  t=data.get("t"), normalized=data["normalized"],
                                  seed=data.get("seed"))
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def write_instance(inst: VectorPairInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")


def read_instance(path) -> VectorPairInstance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("top level: expected JSON object")
    return instance_from_dict(data)
