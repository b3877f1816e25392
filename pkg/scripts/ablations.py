"""Effect of the root cuts and of the discrepancy bound on one suite.

    python scripts/ablations.py data/tsplib/*.tsp

Each configuration must return the same objective; only the effort differs.
"""

import argparse

from ldsolve.instance import load_instance
from ldsolve.search import SolveConfig, solve

CONFIGS = {
    "default": SolveConfig(),
    "no-theorem1": SolveConfig(theorem1=False),
    "cuts-off": SolveConfig(cuts=False),
    "first-only": SolveConfig(first_only=True),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("instances", nargs="+")
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    print(f"{'instance':<10}{'config':<13}{'obj':>7}{'lb0':>10}{'opt':>5}{'pr':>5}{'fails':>9}{'time_s':>8}")
    for path in args.instances:
        inst = load_instance(path)
        objectives = set()
        for label, config in CONFIGS.items():
            config.time_limit = args.time_limit
            res = solve(inst, config)
            st = res.stats
            if label != "first-only" and st.complete:
                objectives.add(res.cost)
            pr = st.proof_discrepancy if st.complete and not config.first_only else "-"
            print(f"{inst.name:<10}{label:<13}{res.cost:>7}{st.lb0:>10.2f}{st.opt_discrepancy:>5}{pr:>5}"
                  f"{st.fails:>9}{st.elapsed:>8.2f}")
        if len(objectives) > 1:
            print(f"  !! objectives differ: {sorted(objectives)}")


if __name__ == "__main__":
    main()
