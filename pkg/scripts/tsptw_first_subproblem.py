"""Objective of the discrepancy-0 subproblem against known TSPTW optima.

    python scripts/tsptw_first_subproblem.py data/ascheuer --ratio 0.15

Instances that are not present in the directory are reported as missing.
"""

import argparse
from pathlib import Path

from ldsolve.instance import load_instance
from ldsolve.search import SolveConfig, solve

KNOWN = {"rbg016a": 179, "rbg016b": 142, "rbg017": 148, "rbg019c": 190, "rbg021.3": 182,
         "rbg021.4": 179, "rbg021.5": 169, "rbg021.6": 134, "rbg021": 190, "rbg035a.2": 166,
         "rbg040a": 386, "rbg042a": 411}


def locate(folder: Path, name: str):
    for p in (folder / name, folder / f"{name}.tw", folder / f"{name}.txt"):
        if p.is_file():
            return p
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("folder", type=Path)
    ap.add_argument("--ratio", type=float, default=0.15)
    ap.add_argument("--time-limit", type=float, default=300.0)
    args = ap.parse_args()

    print(f"{'instance':<12}{'opt':>6}{'obj':>6}{'gap%':>7}{'time_s':>8}{'fails':>8}")
    for name, opt in KNOWN.items():
        path = locate(args.folder, name)
        if path is None:
            print(f"{name:<12}{opt:>6}   missing")
            continue
        res = solve(load_instance(path), SolveConfig(ratio=args.ratio, first_only=True,
                                                     time_limit=args.time_limit))
        if res.cost is None:
            print(f"{name:<12}{opt:>6}   none{res.stats.elapsed:>8.2f}{res.stats.fails:>8}")
            continue
        gap = 100.0 * (res.cost - opt) / opt
        print(f"{name:<12}{opt:>6}{res.cost:>6}{gap:>7.1f}{res.stats.elapsed:>8.2f}{res.stats.fails:>8}")


if __name__ == "__main__":
    main()
