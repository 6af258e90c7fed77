"""Certified YES/NO/UNDECIDABLE decision records shared by all reductions."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from .precision import Interval


class Answer(str, Enum):
    YES = "YES"
    NO = "NO"
    UNDECIDABLE = "UNDECIDABLE"


@dataclass
class ReductionVerdict:
    """Outcome of one distinguisher run.

    ``threshold`` is the interval [no-side bound, yes-side bound]; YES is
    certified when statistic.lo clears threshold.hi, NO when statistic.hi
    drops below threshold.lo.
    """

    answer: Answer
    statistic: Interval
    threshold: Interval
    reduction: str
    precision_bits_used: int
    solve_time: float = 0.0
    details: Optional[Any] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.answer is Answer.YES and not self.statistic.lo >= self.threshold.hi:
            raise ValueError("YES verdict without certified margin")
        if self.answer is Answer.NO and not self.statistic.hi <= self.threshold.lo:
            raise ValueError("NO verdict without certified margin")
