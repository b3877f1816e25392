"""Good-set size, discrepancy of the optimum and of the proof, per ratio.

    python scripts/ratio_sweep.py data/tsplib/*.tsp --ratios 0.025 0.05 0.075 0.1
"""

import argparse

from ldsolve.cli import average, make_record
from ldsolve.instance import load_instance
from ldsolve.search import SolveConfig, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("instances", nargs="+")
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.025, 0.05, 0.075, 0.1])
    ap.add_argument("--time-limit", type=float, default=300.0)
    args = ap.parse_args()

    insts = [load_instance(p) for p in args.instances]
    for r in args.ratios:
        config = SolveConfig(ratio=r, time_limit=args.time_limit)
        print(f"ratio={r}")
        print(f"  {'instance':<12}{'size':>6}{'opt':>5}{'pr':>5}{'fails':>9}{'obj':>8}{'time_s':>8}")
        recs = []
        for inst in insts:
            rec = make_record(inst.name, inst, config, solve(inst, config))
            recs.append(rec)
            pr = "" if rec.pr is None else rec.pr
            print(f"  {rec.instance:<12}{rec.size:>6.2f}{rec.opt:>5}{pr:>5}{rec.fails:>9}"
                  f"{rec.objective:>8}{rec.time_ms / 1000:>8.2f}")
        avg = average(recs)
        print(f"  {'average':<12}{avg.size:>6.2f}{avg.opt:>5}{avg.pr if avg.pr is not None else '':>5}"
              f"{avg.fails:>9}")


if __name__ == "__main__":
    main()
