"""Experiment harness: run distinguishers against the brute-force oracles
over generated instance suites and report agreement, statistics, and timing."""

from __future__ import annotations

import csv
import io
import json
import time
import zlib
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence

from .instances import (InstanceKind, ValidationError, VectorPairInstance,
                        default_dimension, default_threshold, generate)
from .kpca_reduction import kpca_distinguisher
from .krr_reduction import krr_distinguisher
from .nn_reduction import gradient_distinguisher, nn_distinguisher
from .oracles import solve
from .svm_reduction import (soft_margin_distinguisher, svm_bias_distinguisher,
                            svm_distinguisher)
from .verdict import Answer, ReductionVerdict

CSV_HEADER = ("trial,reduction,n,d,t,oracle,verdict,agree,"
              "stat_lo,stat_hi,thresh_lo,thresh_hi,bits,ms")

REDUCTIONS: dict[str, tuple[InstanceKind, Callable[[VectorPairInstance], ReductionVerdict]]] = {
    "svm": (InstanceKind.BHCP, svm_distinguisher),
    "svm_bias": (InstanceKind.BHCP, svm_bias_distinguisher),
    "svm_soft": (InstanceKind.BHCP, soft_margin_distinguisher),
    "kpca": (InstanceKind.BHCP, kpca_distinguisher),
    "krr": (InstanceKind.BHCP, krr_distinguisher),
    "nn_hinge": (InstanceKind.OVP, lambda i: nn_distinguisher(i, loss="hinge")),
    "nn_logistic": (InstanceKind.OVP, lambda i: nn_distinguisher(i, loss="logistic")),
    "grad_relu": (InstanceKind.OVP, lambda i: gradient_distinguisher(i, gadget="relu")),
    "grad_sigmoid": (InstanceKind.OVP, lambda i: gradient_distinguisher(i, gadget="sigmoid")),
}


@dataclass(frozen=True)
class ExperimentConfig:
    reductions: tuple[str, ...]
    sizes: tuple[int, ...] = (4, 6, 8)
    trials_per_case: int = 1
    seed: int = 0

    def __post_init__(self):
        for r in self.reductions:
            if r not in REDUCTIONS:
                raise ValidationError(f"unknown reduction {r!r}; "
                                      f"choose from {sorted(REDUCTIONS)}")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    reduction: str
    n: int
    d: int
    t: Optional[int]
    oracle: str
    verdict: str
    agree: bool
    stat_lo: str
    stat_hi: str
    thresh_lo: str
    thresh_hi: str
    bits: int
    ms: float

    def as_row(self) -> list:
        return [self.trial, self.reduction, self.n, self.d,
                self.t if self.t is not None else "",
                self.oracle, self.verdict, int(self.agree),
                self.stat_lo, self.stat_hi, self.thresh_lo, self.thresh_hi,
                self.bits, f"{self.ms:.3f}"]


@dataclass
class RunReport:
    config: ExperimentConfig
    records: list[TrialRecord] = field(default_factory=list)

    @property
    def agreements(self) -> int:
        return sum(1 for r in self.records if r.agree)

    @property
    def undecided(self) -> int:
        return sum(1 for r in self.records if r.verdict == Answer.UNDECIDABLE.value)

    @property
    def all_agree(self) -> bool:
        return all(r.agree for r in self.records)

    def by_reduction(self) -> dict[str, list[TrialRecord]]:
        out: dict[str, list[TrialRecord]] = {}
        for r in self.records:
            out.setdefault(r.reduction, []).append(r)
        return out


def _fmt_mpfr(x) -> str:
    return repr(x).replace("mpfr(", "").rstrip(")").strip("'\"")


def run_trial(reduction: str, inst: VectorPairInstance, trial: int = 0
              ) -> TrialRecord:
    kind, fn = REDUCTIONS[reduction]
    if inst.kind is not kind:
        raise ValidationError(f"{reduction} expects a {kind.value} instance")
    truth = solve(inst)
    oracle = Answer.YES if truth.has_pair else Answer.NO
    t0 = time.perf_counter()
    verdict = fn(inst)
    ms = (time.perf_counter() - t0) * 1000.0
    return TrialRecord(
        trial=trial, reduction=reduction, n=inst.n, d=inst.d, t=inst.t,
        oracle=oracle.value, verdict=verdict.answer.value,
        agree=verdict.answer is oracle,
        stat_lo=_fmt_mpfr(verdict.statistic.lo),
        stat_hi=_fmt_mpfr(verdict.statistic.hi),
        thresh_lo=_fmt_mpfr(verdict.threshold.lo),
        thresh_hi=_fmt_mpfr(verdict.threshold.hi),
        bits=verdict.precision_bits_used, ms=ms)


def _trial_instance(kind: InstanceKind, n: int, planted: str, seed: int
                    ) -> VectorPairInstance:
    d = default_dimension(n)
    t = default_threshold(d) if kind is InstanceKind.BHCP else None
    return generate(kind, n, d, t=t, planted=planted, seed=seed)


def run_suite(config: ExperimentConfig) -> RunReport:
    """Balanced planted-yes/planted-no suite; deterministic modulo timing."""
    report = RunReport(config=config)
    trial = 0
    for reduction in config.reductions:
        kind, _ = REDUCTIONS[reduction]
        for n in config.sizes:
            for rep in range(config.trials_per_case):
                for planted in ("yes", "no"):
                    key = f"{reduction}:{n}:{rep}:{planted}:{config.seed}"
                    seed = zlib.crc32(key.encode())
                    inst = _trial_instance(kind, n, planted, seed)
                    report.records.append(run_trial(reduction, inst, trial))
                    trial += 1
    return report


def bench_scaling(reduction: str, sizes: Sequence[int], seed: int = 0,
                  repeats: int = 1) -> list[dict]:
    """Median wall time per size; `ratio` is time[i] / time[i-1]."""
    kind, _ = REDUCTIONS[reduction]
    rows, prev = [], None
    for n in sizes:
        times = []
        for rep in range(repeats):
            inst = _trial_instance(kind, n, "no", seed + rep)
            rec = run_trial(reduction, inst)
            times.append(rec.ms)
        times.sort()
        med = times[len(times) // 2]
        ratio = med / prev if prev else None
        rows.append({"reduction": reduction, "n": n, "ms": round(med, 3),
                     "ratio": round(ratio, 3) if ratio else None})
        prev = med
    return rows


def emit_report(report: RunReport, fmt: str = "markdown") -> str:
    if fmt == "json":
        return json.dumps({
            "config": asdict(report.config),
            "agreements": report.agreements,
            "trials": len(report.records),
            "undecided": report.undecided,
            "records": [asdict(r) for r in report.records],
        }, indent=2, default=str)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in report.records:
            writer.writerow(r.as_row())
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| reduction | trials | agree | undecided | max ms |",
                 "|---|---|---|---|---|"]
        for name, recs in sorted(report.by_reduction().items()):
            agree = sum(1 for r in recs if r.agree)
            und = sum(1 for r in recs if r.verdict == Answer.UNDECIDABLE.value)
            lines.append(f"| {name} | {len(recs)} | {agree} | {und} | "
                         f"{max(r.ms for r in recs):.1f} |")
        lines.append("")
        lines.append(f"total: {report.agreements}/{len(report.records)} agree, "
                     f"{report.undecided} undecided")
        return "\n".join(lines)
    raise ValidationError(f"unknown report format {fmt!r}")
