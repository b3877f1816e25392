"""Limited discrepancy search driver.

Domains are split once, at the root, into good and bad values by reduced
cost. Subproblem k contains exactly the solutions with k variables on a bad
value; subproblems are solved to optimality in increasing k, and skipped
once their discrepancy bound reaches the incumbent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ldsolve.assignment import APInfeasible
from ldsolve.instance import SENTINEL, Instance, Kind
from ldsolve.lagrangean import SCALE, LagrangeanState, SubgradientParams, subgradient_optimize
from ldsolve.model import greedy_tour, initial_domains
from ldsolve.partition import ConfigError, Partition, bound_for_discrepancy, partition_domains
from ldsolve.store import DomainStore
from ldsolve.subproblem import (BoundModel, BranchAndBound, cost_filter, propagate_nocycle,
                                propagate_time_windows)

DEFAULT_RATIO = {Kind.TSP: 0.075, Kind.TSPTW: 0.15}


@dataclass
class DiscrepancyConstraint:
    """Exactly ``k`` variables take a value from their bad set."""

    part: Partition
    k: int

    def counts(self, dom: np.ndarray) -> tuple[int, int, np.ndarray]:
        """(#committed bad, #committed good, mask of uncommitted variables)."""
        live = dom.any(axis=1)
        good = live & ~(dom & self.part.bad).any(axis=1)
        bad = live & ~(dom & self.part.good).any(axis=1)
        return int(bad.sum()), int(good.sum()), ~(good | bad)

    def propagate(self, store: DomainStore) -> bool:
        n = store.n
        n_bad, n_good, open_ = self.counts(store.dom)
        if n_bad > self.k or n_good > n - self.k:
            return False
        if not open_.any():
            return True
        if n_bad == self.k:
            store.remove_mask(open_[:, None] & self.part.bad)
        elif n_good == n - self.k:
            store.remove_mask(open_[:, None] & self.part.good)
        return True

    def __call__(self, store: DomainStore) -> bool:
        return self.propagate(store)

    def discrepancy(self, succ) -> int:
        return int(self.part.bad[np.arange(len(succ)), np.asarray(succ)].sum())


@dataclass
class SolveConfig:
    ratio: float | None = None  # None: per-kind default
    cuts: bool = True
    sg_iters: int = 150
    first_only: bool = False
    max_k: int | None = None
    time_limit: float | None = None
    theorem1: bool = True
    ub: int | None = None
    output: str = "plain"  # csv, json or plain

    def __post_init__(self):
        if self.ratio is not None and not 0 < self.ratio <= 1:
            raise ConfigError(f"ratio must lie in (0, 1], got {self.ratio}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigError(f"time limit must be positive, got {self.time_limit}")
        if self.output not in ("csv", "json", "plain"):
            raise ConfigError(f"unknown output format {self.output!r}")

    def ratio_for(self, kind: Kind) -> float:
        r = DEFAULT_RATIO[kind] if self.ratio is None else self.ratio
        if not 0 < r <= 1:
            raise ConfigError(f"ratio must lie in (0, 1], got {r}")
        return r


@dataclass
class SearchStats:
    fails: int = 0
    elapsed: float = 0.0
    opt_discrepancy: int | None = None  # k of the subproblem holding the returned tour
    proof_discrepancy: int | None = None  # level whose bound (or exhaustion) proved optimality
    first_subproblem_size: float | None = None
    complete: bool = False
    lb0: float | None = None
    per_k: list[tuple[int, int]] = field(default_factory=list)  # (k, fails) per solved subproblem


@dataclass
class SolveResult:
    tour: list[int] | None
    cost: int | None
    stats: SearchStats
    partition: Partition | None = None

    @property
    def infeasible(self) -> bool:
        return self.tour is None and self.stats.complete


def root_domains(inst: Instance) -> DomainStore | None:
    """Initial store after root propagation, None if already infeasible."""
    store = DomainStore(initial_domains(inst), inst)
    if not propagate_nocycle(store):
        return None
    if inst.kind is Kind.TSPTW:
        while True:
            mark = store.mark()
            if not propagate_time_windows(store, inst) or not propagate_nocycle(store):
                return None
            if store.mark() == mark:
                break
    return store


@dataclass
class Root:
    """Root node state: propagated domains, bound, partition and initial incumbent.

    ``part`` is None when the root is already infeasible (for the given ``ub``).
    """

    store: DomainStore | None
    lag: LagrangeanState | None
    part: Partition | None
    ub: int | None
    best: list[int] | None


def prepare_root(inst: Instance, config: SolveConfig) -> Root:
    ratio = config.ratio_for(inst.kind)
    store = root_domains(inst)
    if store is None:
        return Root(None, None, None, config.ub, None)
    params = SubgradientParams(max_iterations=config.sg_iters if config.cuts else 0)
    try:
        lag = subgradient_optimize(inst, params, store.dom)
    except APInfeasible:
        return Root(store, None, None, config.ub, None)
    ap = lag.ap_at_best

    ub, best = config.ub, None
    greedy = greedy_tour(inst, store.dom)
    if greedy is not None:
        c = inst.tour_cost(greedy)
        if ub is None or c < ub:
            ub, best = c, greedy
    # arcs that cannot lead to a tour of cost <= ub leave the domains before they are split
    if ub is not None:
        if not cost_filter(store, ap, ub + (best is not None), lag.penalty, SCALE) or not propagate_nocycle(store):
            return Root(store, lag, None, ub, best)

    # rank on whole cost units: reduced costs closer than one unit count as ties
    part = partition_domains(ap.reduced // SCALE * SCALE, store.dom, ratio)
    return Root(store, lag, part, ub, best)


def solve(inst: Instance, config: SolveConfig | None = None) -> SolveResult:
    config = config or SolveConfig()
    t0 = time.monotonic()
    deadline = None if config.time_limit is None else t0 + config.time_limit
    stats = SearchStats()

    def done(tour, cost, part=None, complete=True):
        stats.elapsed = time.monotonic() - t0
        stats.complete = complete
        return SolveResult(tour, cost, stats, part)

    root = prepare_root(inst, config)
    if root.part is None:
        stats.fails = 1
        cost = None if root.best is None else inst.tour_cost(root.best)
        return done(root.best, cost)
    store, lag, part, ub, best = root.store, root.lag, root.part, root.ub, root.best
    ap = lag.ap_at_best
    stats.lb0 = float(lag.best_bound)
    stats.first_subproblem_size = part.size
    model = BoundModel(cost=lag.modified_cost, offset=lag.penalty, scale=SCALE, root=ap)
    lb0_scaled = ap.lower_bound + lag.penalty

    last_k = min(inst.n, part.branching_count)
    if config.max_k is not None:
        last_k = min(last_k, config.max_k)
    if config.first_only:
        last_k = 0

    # cost of the best tour found so far and the discrepancy it was found in
    best_cost = None if best is None else inst.tour_cost(best)
    found_k = None if best is None else DiscrepancyConstraint(part, 0).discrepancy(best)
    proven = False
    for k in range(last_k + 1):
        if config.theorem1 and ub is not None:
            extra = _l_sum(part, k)
            if extra >= SENTINEL or lb0_scaled + extra > (ub - 1) * SCALE:
                # L is sorted, so every later level is dominated as well
                stats.proof_discrepancy = k
                proven = True
                break
        constraint = DiscrepancyConstraint(part, k)
        bnb = BranchAndBound(inst, model=model, constraints=[constraint],
                             accept=lambda s, c=constraint, k=k: c.discrepancy(s) == k,
                             deadline=deadline)
        outcome = bnb.run(store, ub, ap)
        stats.fails += outcome.fails
        stats.per_k.append((k, outcome.fails))
        if outcome.tour is not None:
            best, ub = outcome.tour, outcome.cost
            best_cost, found_k = outcome.cost, k
        if outcome.timed_out:
            stats.opt_discrepancy = found_k
            return done(best, best_cost, part, complete=False)
        stats.proof_discrepancy = k
    else:
        # every subproblem up to last_k was explored
        proven = last_k >= min(inst.n, part.branching_count)

    stats.opt_discrepancy = found_k
    return done(best, best_cost, part, complete=proven)


def _l_sum(part: Partition, k: int) -> int:
    """Scaled sum of the k smallest bad reduced costs (SENTINEL if any is missing)."""
    total = bound_for_discrepancy(0, part, k)
    return SENTINEL if total >= SENTINEL else total
