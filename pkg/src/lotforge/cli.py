"""Command-line front end: generate, solve, verify, bench.

Exit codes: 0 success, 1 usage or I/O error, 2 algorithmic failure (the
cut loop hit its round cap, or a guarantee assertion failed), 3
verification mismatch.  All rationals are reported both exactly ("p/q")
and as 12-significant-digit decimals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from . import cmils_master, instance, oracles
from .errors import InstanceFormatError, LotforgeError, RoundLimitError

DIGITS = 12


def decimal_str(value: Fraction, digits: int = DIGITS) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(value.numerator) / Decimal(value.denominator))


def _pair(value: Optional[Fraction]) -> Optional[dict]:
    if value is None:
        return None
    return {"exact": instance.format_rat(value), "decimal": decimal_str(value)}


@dataclass
class RunReport:
    instance_id: str
    lp_value: Fraction
    ordering: Fraction
    holding: Fraction
    total: Fraction
    oracle_cost: Optional[Fraction]
    ratio_vs_lp: Optional[Fraction]
    ratio_vs_opt: Optional[Fraction]
    rounds: int
    cuts: int
    wall_time_ms: float

    CSV_HEADER = ("instance_id,lp_value,lp_value_decimal,ordering,ordering_decimal,"
                  "holding,holding_decimal,total,total_decimal,"
                  "oracle_cost,oracle_cost_decimal,ratio_vs_lp,ratio_vs_lp_decimal,"
                  "ratio_vs_opt,ratio_vs_opt_decimal,rounds,cuts,wall_time_ms")

    def to_json_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "lp_value": _pair(self.lp_value),
            "alg_cost": {
                "ordering": _pair(self.ordering),
                "holding": _pair(self.holding),
                "total": _pair(self.total),
            },
            "oracle_cost": _pair(self.oracle_cost),
            "ratio_vs_lp": _pair(self.ratio_vs_lp),
            "ratio_vs_opt": _pair(self.ratio_vs_opt),
            "rounds": self.rounds,
            "cuts": self.cuts,
            "wall_time_ms": round(self.wall_time_ms, 3),
        }

    def to_csv_row(self) -> str:
        def both(v: Optional[Fraction]) -> list[str]:
            if v is None:
                return ["", ""]
            return [instance.format_rat(v), decimal_str(v)]

        cells = [self.instance_id]
        for v in (self.lp_value, self.ordering, self.holding, self.total,
                  self.oracle_cost, self.ratio_vs_lp, self.ratio_vs_opt):
            cells.extend(both(v))
        cells.extend([str(self.rounds), str(self.cuts), f"{self.wall_time_ms:.3f}"])
        return ",".join(cells)


def build_report(instance_id: str, result: cmils_master.PipelineResult,
                 oracle_cost: Optional[Fraction]) -> RunReport:
    sched = result.schedule
    lp_value = result.certificate.lp_value
    return RunReport(
        instance_id=instance_id,
        lp_value=lp_value,
        ordering=sched.ordering_cost,
        holding=sched.holding_cost,
        total=sched.total_cost,
        oracle_cost=oracle_cost,
        ratio_vs_lp=(sched.total_cost / lp_value) if lp_value > 0 else None,
        ratio_vs_opt=(sched.total_cost / oracle_cost)
        if oracle_cost is not None and oracle_cost > 0 else None,
        rounds=result.certificate.rounds,
        cuts=result.certificate.num_cuts,
        wall_time_ms=result.elapsed_ms,
    )


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def _trace_enabled(args) -> bool:
    return bool(getattr(args, "trace", False)) or os.environ.get("LOTFORGE_TRACE") == "1"


def cmd_generate(args) -> int:
    if args.family == "kc-gap":
        if args.R is None:
            print("kc-gap needs --R", file=sys.stderr)
            return 1
        inst = instance.gen_kc_gap(instance.parse_rat(args.R))
    else:
        if args.T is None or args.N is None:
            print("random family needs --T and --N", file=sys.stderr)
            return 1
        inst = instance.gen_random(
            args.seed, T=args.T, N=args.N,
            capacity_range=_parse_range(args.capacity_range),
            cost_range=_parse_range(args.cost_range),
            demand_range=_parse_range(args.demand_range),
            slack_factor=instance.parse_rat(args.slack))
    instance.save(inst, args.out)
    return 0


def cmd_solve(args) -> int:
    trace = (lambda line: print(line, file=sys.stderr)) if _trace_enabled(args) else None
    try:
        inst = instance.load(args.infile)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    started = time.perf_counter()
    try:
        result = cmils_master.run_pipeline(inst, max_rounds=args.max_rounds, trace=trace)
    except RoundLimitError as exc:
        print(f"round cap exceeded: {exc}", file=sys.stderr)
        return 2
    elapsed = (time.perf_counter() - started) * 1000.0
    instance.save_schedule(result.schedule, args.out)
    result.elapsed_ms = elapsed
    report = build_report(os.path.basename(args.infile), result, None)
    doc = report.to_json_dict()
    doc["certificate"] = result.certificate.to_json_dict()
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    try:
        inst = instance.load(args.instance)
        sched = instance.load_schedule(args.schedule)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ok, problems = instance.check_feasible(inst, sched)
    if not ok:
        for line in problems:
            print(f"mismatch: {line}", file=sys.stderr)
        return 3
    ordering, holding, total = instance.cost(inst, sched)
    stated = (sched.ordering_cost, sched.holding_cost, sched.total_cost)
    recomputed = (ordering, holding, total)
    if stated != recomputed:
        print(f"mismatch: stated costs {tuple(map(str, stated))} != "
              f"recomputed {tuple(map(str, recomputed))}", file=sys.stderr)
        return 3
    return 0


def cmd_bench(args) -> int:
    lo_txt, _, hi_txt = args.seeds.partition("..")
    try:
        lo, hi = int(lo_txt), int(hi_txt)
    except ValueError:
        print(f"bad --seeds {args.seeds!r}; want a..b", file=sys.stderr)
        return 1
    if args.oracle and args.T > oracles.CMILS_CAP:
        print(f"--oracle refused: T={args.T} above cap {oracles.CMILS_CAP}",
              file=sys.stderr)
        return 1
    lines = [RunReport.CSV_HEADER]
    for seed in range(lo, hi + 1):
        inst = instance.gen_random(seed, T=args.T, N=args.N)
        try:
            result = cmils_master.run_pipeline(inst, max_rounds=args.max_rounds)
        except RoundLimitError as exc:
            print(f"seed {seed}: round cap exceeded: {exc}", file=sys.stderr)
            return 2
        oracle_cost = None
        if args.oracle:
            oracle_cost = oracles.brute_force_cmils(inst).optimum_cost
            if result.schedule.total_cost > 10 * oracle_cost:
                print(f"seed {seed}: cost exceeds 10x optimum", file=sys.stderr)
                return 2
        report = build_report(f"seed-{seed}", result, oracle_cost)
        lines.append(report.to_csv_row())
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lotforge",
        description="Capacitated multi-item lot-sizing solver suite")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write an instance JSON file")
    gen.add_argument("--family", choices=["random", "kc-gap"], default="random")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--T", type=int)
    gen.add_argument("--N", type=int)
    gen.add_argument("--R", help="demand for the kc-gap family (rational)")
    gen.add_argument("--capacity-range", default="3:12")
    gen.add_argument("--cost-range", default="1:20")
    gen.add_argument("--demand-range", default="1:8")
    gen.add_argument("--slack", default="3/2")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", help="run the full pipeline on an instance")
    solve.add_argument("--in", dest="infile", required=True)
    solve.add_argument("--out", required=True, help="schedule JSON output path")
    solve.add_argument("--max-rounds", type=int, default=200)
    solve.add_argument("--trace", action="store_true")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="re-check a schedule against an instance")
    verify.add_argument("--instance", required=True)
    verify.add_argument("--schedule", required=True)
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="CSV of pipeline runs over a seed range")
    bench.add_argument("--seeds", required=True, help="inclusive range a..b")
    bench.add_argument("--T", type=int, required=True)
    bench.add_argument("--N", type=int, required=True)
    bench.add_argument("--max-rounds", type=int, default=200)
    bench.add_argument("--oracle", action="store_true")
    bench.add_argument("--out")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (OSError, ValueError, LotforgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
