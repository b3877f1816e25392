"""Command line: solve single instances, run suites, query the oracles.

Exit codes: 0 success, 1 infeasible instance, 2 usage or configuration
error, 3 unreadable instance file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from ldsolve.instance import Instance, Kind, ParseError, load_instance
from ldsolve.lagrangean import SCALE
from ldsolve.partition import ConfigError
from ldsolve.search import SolveConfig, SolveResult, prepare_root, solve

CSV_COLUMNS = ["instance", "n", "ratio", "size", "objective", "opt", "pr", "fails", "time_ms"]

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3


@dataclass
class Record:
    instance: str
    n: int | None = None
    ratio: float | None = None
    size: float | None = None
    objective: int | None = None
    opt: int | None = None
    pr: int | None = None
    fails: int | None = None
    time_ms: float | None = None
    complete: bool = False
    error: str | None = None

    def row(self) -> list[str]:
        def fmt(v, digits=None):
            if v is None:
                return ""
            return f"{v:.{digits}f}" if digits is not None else str(v)

        obj = fmt(self.objective) if self.error is None else f"error: {self.error}"
        return [self.instance, fmt(self.n), fmt(self.ratio, 3), fmt(self.size, 2), obj,
                fmt(self.opt), fmt(self.pr), fmt(self.fails), fmt(self.time_ms, 1)]


def make_record(name: str, inst: Instance, config: SolveConfig, res: SolveResult) -> Record:
    st = res.stats
    return Record(
        instance=name,
        n=inst.n,
        ratio=config.ratio_for(inst.kind),
        size=st.first_subproblem_size,
        objective=res.cost,
        opt=st.opt_discrepancy,
        # an incomplete run has proven nothing
        pr=st.proof_discrepancy if st.complete and not config.first_only else None,
        fails=st.fails,
        time_ms=st.elapsed * 1000,
        complete=st.complete,
    )


def run_suite(paths: list[str], config: SolveConfig) -> list[Record]:
    """One record per file, in order; failures are recorded in their row."""
    records = []
    for p in paths:
        name = Path(p).stem
        try:
            inst = load_instance(p)
        except (OSError, ParseError, ValueError) as exc:
            records.append(Record(instance=name, error=str(exc)))
            continue
        res = solve(inst, config)
        records.append(make_record(name, inst, config, res))
    return records


def average(records: list[Record]) -> Record | None:
    ok = [r for r in records if r.error is None]
    if not ok:
        return None

    def mean(field):
        vals = [getattr(r, field) for r in ok if getattr(r, field) is not None]
        return sum(vals) / len(vals) if vals else None

    avg = Record(instance="average")
    avg.size = mean("size")
    avg.time_ms = mean("time_ms")
    fails = mean("fails")
    avg.fails = None if fails is None else round(fails, 1)
    opt = mean("opt")
    avg.opt = None if opt is None else round(opt, 2)
    pr = mean("pr")
    avg.pr = None if pr is None else round(pr, 2)
    return avg


def render(records: list[Record], fmt: str, with_average: bool = False) -> str:
    rows = list(records)
    if with_average and rows:
        avg = average(rows)
        if avg is not None:
            rows.append(avg)
    if fmt == "json":
        return json.dumps([{k: v for k, v in vars(r).items()} for r in rows], indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.row())
        return buf.getvalue().rstrip("\n")
    lines = []
    for r in rows:
        if r.error is not None:
            lines.append(f"{r.instance}: error: {r.error}")
            continue
        parts = [f"{c}={v}" for c, v in zip(CSV_COLUMNS[1:], r.row()[1:]) if v != ""]
        lines.append(f"{r.instance}: " + " ".join(parts))
    return "\n".join(lines)


# ----------------------------------------------------------------- commands


def _config(args) -> SolveConfig:
    limit = args.time_limit
    if limit is None and os.environ.get("LDSOLVE_TIME_LIMIT"):
        limit = float(os.environ["LDSOLVE_TIME_LIMIT"])
    return SolveConfig(ratio=args.ratio, cuts=args.cuts == "on", sg_iters=args.sg_iters,
                       first_only=args.first_only, max_k=args.max_k, time_limit=limit,
                       theorem1=not args.no_theorem1, ub=args.ub, output=args.format)


def cmd_solve(args) -> int:
    config = _config(args)
    inst = load_instance(args.instance)
    res = solve(inst, config)
    rec = make_record(inst.name or Path(args.instance).stem, inst, config, res)
    print(render([rec], config.output))
    if args.format == "plain" and res.tour is not None:
        print("tour: " + " ".join(map(str, _route(inst, res.tour))))
    if res.tour is None:
        print("infeasible" if res.stats.complete else "no solution within the limits", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _config(args)
    suite = Path(args.suite)
    paths = []
    for line in suite.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            p = Path(line)
            paths.append(str(p if p.is_absolute() else suite.parent / p))
    records = run_suite(paths, config)
    print(render(records, config.output, with_average=True))
    return EXIT_OK


def cmd_oracle(args) -> int:
    from ldsolve import oracle

    inst = load_instance(args.instance)
    if inst.kind is Kind.TSPTW:
        res = oracle.tsptw_enumerate(inst)
    else:
        res = oracle.tsp_optimum(inst)
    if res is None:
        print("infeasible")
        return EXIT_INFEASIBLE
    print(f"{inst.name}: objective={res[0]}")
    return EXIT_OK


def cmd_partition_report(args) -> int:
    """Good-set sizes and lower bounds per discrepancy for a list of ratios."""
    inst = load_instance(args.instance)
    print(f"{inst.name}: n={inst.n}")
    for r in args.ratios:
        config = SolveConfig(ratio=r, cuts=args.cuts == "on", sg_iters=args.sg_iters)
        root = prepare_root(inst, config)
        if root.part is None:
            print("infeasible at the root")
            return EXIT_INFEASIBLE
        part, lag = root.part, root.lag
        acc = lag.best_scaled
        bounds = [acc]
        for k in range(1, min(args.max_k, part.branching_count) + 1):
            acc += part.l_list[k - 1]
            bounds.append(acc)
        text = " ".join(f"{b / SCALE:.1f}" for b in bounds)
        print(f"ratio={r:.3f} size={part.size:.3f} lb0={float(lag.best_bound):.2f} ub={root.ub} bounds[k]={text}")
    return EXIT_OK


def _route(inst: Instance, succ) -> list[int]:
    from ldsolve.model import route_order

    return route_order(succ, inst.depot[0] if inst.kind is Kind.TSPTW else 0)


def _ratio(text: str) -> float:
    try:
        r = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 < r <= 1:
        raise argparse.ArgumentTypeError(f"ratio must lie in (0, 1], got {r}")
    return r


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldsolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def search_flags(p):
        p.add_argument("--ratio", type=_ratio, default=None,
                       help="good-set ratio (default 0.075 for TSP, 0.15 for TSPTW)")
        p.add_argument("--cuts", choices=["on", "off"], default="on", help="Lagrangean subtour cuts at the root")
        p.add_argument("--sg-iters", type=int, default=150, help="subgradient iterations")
        p.add_argument("--first-only", action="store_true", help="solve the discrepancy-0 subproblem only")
        p.add_argument("--max-k", type=int, default=None, help="largest discrepancy explored")
        p.add_argument("--time-limit", type=_positive, default=None,
                       help="seconds per instance (env LDSOLVE_TIME_LIMIT as fallback)")
        p.add_argument("--no-theorem1", action="store_true", help="disable discrepancy-bound pruning")
        p.add_argument("--ub", type=int, default=None, help="initial upper bound")
        p.add_argument("--format", choices=["csv", "json", "plain"], default="plain")

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("instance")
    search_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="solve every instance listed in a suite file")
    p.add_argument("suite", help="text file with one instance path per line")
    search_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="exact value by an independent method (small instances)")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("partition-report", help="good-set sizes and discrepancy bounds")
    p.add_argument("instance")
    p.add_argument("--ratios", type=_ratio, nargs="+", default=[0.025, 0.05, 0.075, 0.1, 0.15])
    p.add_argument("--cuts", choices=["on", "off"], default="on")
    p.add_argument("--sg-iters", type=int, default=150)
    p.add_argument("--max-k", type=int, default=5)
    p.set_defaults(func=cmd_partition_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
