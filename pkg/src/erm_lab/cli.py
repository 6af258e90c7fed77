"""Command-line front end.

Exit codes: 0 on success, 1 on error or oracle disagreement, 2 when any
verdict is undecidable at the precision cap.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (CSV_HEADER, REDUCTIONS, ExperimentConfig, RunReport,
                      bench_scaling, emit_report, run_trial, run_suite)
from .instances import (ValidationError, default_dimension, default_threshold,
                        generate, instance_from_dict, instance_to_dict)
from .oracles import solve
from .verdict import Answer

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDECIDABLE = 2


def _load_instance(path: str):
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def _cmd_gen(args) -> int:
    d = args.d if args.d is not None else default_dimension(args.n)
    t = args.t
    if args.kind == "BHCP" and t is None:
        t = default_threshold(d)
    inst = generate(args.kind, args.n, d, t=t, planted=args.planted,
                    seed=args.seed)
    payload = json.dumps(instance_to_dict(inst), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def _cmd_decide(args) -> int:
    inst = _load_instance(args.instance)
    _, fn = REDUCTIONS[args.reduction]
    verdict = fn(inst)
    print(f"{args.reduction}: {verdict.answer.value} "
          f"(bits={verdict.precision_bits_used}, {verdict.solve_time:.3f}s)")
    return EXIT_UNDECIDABLE if verdict.answer is Answer.UNDECIDABLE else EXIT_OK


def _cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    rec = run_trial(args.reduction, inst)
    truth = "YES" if solve(inst).has_pair else "NO"
    print(f"oracle={truth} {args.reduction}={rec.verdict} "
          f"agree={rec.agree} bits={rec.bits} ms={rec.ms:.1f}")
    if rec.verdict == Answer.UNDECIDABLE.value:
        return EXIT_UNDECIDABLE
    return EXIT_OK if rec.agree else EXIT_FAIL


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = bench_scaling(args.reduction, sizes, seed=args.seed,
                         repeats=args.repeats)
    for row in rows:
        ratio = f"{row['ratio']:.2f}" if row["ratio"] else "-"
        print(f"n={row['n']:>4}  {row['ms']:>10.3f} ms  ratio={ratio}")
    return EXIT_OK


def _cmd_report(args) -> int:
    reductions = tuple(args.reductions.split(","))
    sizes = tuple(int(s) for s in args.sizes.split(","))
    cfg = ExperimentConfig(reductions=reductions, sizes=sizes,
                           trials_per_case=args.trials, seed=args.seed)
    report = run_suite(cfg)
    text = emit_report(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        print(text)
    if report.undecided:
        return EXIT_UNDECIDABLE
    return EXIT_OK if report.all_agree else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="erm-lab",
                                description="certified kernel/ERM reduction laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance with known ground truth")
    g.add_argument("--kind", choices=["OVP", "BHCP"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int)
    g.add_argument("--t", type=int, help="Hamming threshold (BHCP)")
    g.add_argument("--planted", choices=["yes", "no", "random"], default="random")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=_cmd_gen)

    d = sub.add_parser("decide", help="run one distinguisher on an instance file")
    d.add_argument("--reduction", choices=sorted(REDUCTIONS), required=True)
    d.add_argument("--instance", required=True)
    d.set_defaults(func=_cmd_decide)

    v = sub.add_parser("verify", help="compare a distinguisher against the oracle")
    v.add_argument("--reduction", choices=sorted(REDUCTIONS), required=True)
    v.add_argument("--instance", required=True)
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="wall-time scaling over instance sizes")
    b.add_argument("--reduction", choices=sorted(REDUCTIONS), required=True)
    b.add_argument("--sizes", default="4,8,16")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=_cmd_bench)

    r = sub.add_parser("report", help="run a suite and emit a report")
    r.add_argument("--reductions", default=",".join(sorted(REDUCTIONS)))
    r.add_argument("--sizes", default="4,6,8")
    r.add_argument("--trials", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--format", choices=["markdown", "json", "csv"],
                   default="markdown")
    r.add_argument("--out")
    r.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
