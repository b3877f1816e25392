"""Complete branch-and-bound over the Next variables of one subproblem.

Every node is propagated to a fixpoint (chain/no-subtour reasoning, time
windows, any extra constraints such as the discrepancy constraint), then
bounded by an assignment problem re-solved incrementally from the parent's,
and finally filtered by reduced costs against the incumbent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ldsolve.assignment import APInfeasible, APResult, resolve_with_mask, solve_ap
from ldsolve.instance import SENTINEL, Instance, Kind
from ldsolve.model import is_feasible, relaxation_cost
from ldsolve.store import DomainStore

Propagator = Callable[[DomainStore], bool]


class TimeLimitReached(Exception):
    pass


# ------------------------------------------------------------------ propagators


def bind(store: DomainStore, i: int, j: int) -> bool:
    """Commit Next_i = j: clear row i and column j, merge chains, forbid short cycles."""
    if not store.dom[i, j]:
        return False
    n = store.n
    row = np.zeros_like(store.dom)
    row[i] = True
    row[:, j] = True
    row[i, j] = False
    store.remove_mask(row)
    store.assign(store.bound, i, j)
    h = store.head[i]
    t = store.tail[j]
    total = store.count[h] + store.count[j]
    store.assign(store.tail, h, t)
    store.assign(store.head, t, h)
    store.assign(store.count, h, total)
    if total < n:
        store.remove(t, h)
    return True


def propagate_nocycle(store: DomainStore) -> bool:
    """Bind forced variables and keep bound chains from closing early.

    A variable is forced when its domain is a single value, or when it is the
    only remaining predecessor of some node.
    """
    dom = store.dom
    while True:
        sizes = dom.sum(axis=1)
        if (sizes == 0).any():
            return False
        free = store.bound < 0
        rows = np.flatnonzero(free & (sizes == 1))
        if len(rows):
            i = int(rows[0])
            if not bind(store, i, int(np.flatnonzero(dom[i])[0])):
                return False
            continue
        preds = dom.sum(axis=0)
        if (preds == 0).any():
            return False
        taken = np.zeros(store.n, dtype=bool)
        taken[store.bound[~free]] = True
        cols = np.flatnonzero(~taken & (preds == 1))
        if len(cols):
            j = int(cols[0])
            if not bind(store, int(np.flatnonzero(dom[:, j])[0]), j):
                return False
            continue
        return True


def propagate_time_windows(store: DomainStore, inst: Instance) -> bool:
    """Earliest/latest service-time bounds and deadline-based arc removal."""
    cost = inst.cost
    start, end = inst.depot
    while True:
        d = store.dom.copy()
        d[end, start] = False
        arrive = np.where(d, store.est[:, None] + cost, SENTINEL).min(axis=0)
        est = np.maximum(store.est, arrive)
        est[start] = store.est[start]
        leave = np.where(d, store.lst[None, :] - cost, -SENTINEL).max(axis=1)
        lst = np.minimum(store.lst, leave)
        lst[end] = store.lst[end]
        if (est > store.lst).any() or (lst < est).any():
            return False
        changed = False
        up = np.flatnonzero(est != store.est)
        if len(up):
            store.assign(store.est, up, est[up])
            changed = True
        down = np.flatnonzero(lst != store.lst)
        if len(down):
            store.assign(store.lst, down, lst[down])
            changed = True
        late = d & (store.est[:, None] + cost > store.lst[None, :])
        if store.remove_mask(late):
            changed = True
        if not changed:
            return True


def cost_filter(store: DomainStore, ap: APResult, ub: int | None, offset: int = 0, scale: int = 1) -> bool:
    """Remove arcs whose reduced-cost bound cannot beat the incumbent ``ub``.

    Bounds live in units of 1/scale; costs are integral so an arc goes once
    ceil(bound) >= ub.
    """
    if ub is None or ub >= SENTINEL:
        return True
    limit = (ub - 1) * scale - (ap.lower_bound + offset)
    store.remove_mask(store.dom & (ap.reduced > limit))
    return bool(store.dom.any(axis=1).all())


# ------------------------------------------------------------------- search


@dataclass
class BoundModel:
    """Cost matrix (in units of 1/scale) and constant for the node bound."""

    cost: np.ndarray
    offset: int = 0
    scale: int = 1
    root: APResult | None = None

    @classmethod
    def plain(cls, inst: Instance) -> "BoundModel":
        return cls(cost=relaxation_cost(inst))

    def root_ap(self, domains: np.ndarray) -> APResult:
        if self.root is not None and not (domains & ~self.root.available).any():
            return resolve_with_mask(self.root, domains)
        return solve_ap(self.cost, domains)


@dataclass
class SearchOutcome:
    tour: list[int] | None
    cost: int | None
    fails: int
    nodes: int
    timed_out: bool = False


@dataclass
class BranchAndBound:
    inst: Instance
    model: BoundModel | None = None
    constraints: list[Propagator] = field(default_factory=list)
    accept: Callable[[list[int]], bool] | None = None
    deadline: float | None = None

    def __post_init__(self):
        if self.model is None:
            self.model = BoundModel.plain(self.inst)
        self.fails = 0
        self.nodes = 0
        self.best: list[int] | None = None
        self.ub: int | None = None

    # node-level helpers ------------------------------------------------

    def _propagate(self, store: DomainStore) -> bool:
        tw = self.inst.kind is Kind.TSPTW
        while True:
            mark = store.mark()
            if not propagate_nocycle(store):
                return False
            if tw and not propagate_time_windows(store, self.inst):
                return False
            for prop in self.constraints:
                if not prop(store):
                    return False
            if store.mark() == mark:
                return True

    def _pruned(self, ap: APResult) -> bool:
        if self.ub is None:
            return False
        return ap.lower_bound + self.model.offset > (self.ub - 1) * self.model.scale

    def _offer(self, succ) -> None:
        succ = [int(s) for s in succ]
        if self.accept is not None and not self.accept(succ):
            return
        if not is_feasible(self.inst, succ):
            return
        cost = self.inst.tour_cost(succ)
        if self.ub is None or cost < self.ub:
            self.ub = cost
            self.best = succ

    def _tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 64 == 1 and time.monotonic() > self.deadline:
            raise TimeLimitReached

    def _node(self, store: DomainStore, ap: APResult) -> None:
        self._tick()
        m = self.model
        while True:
            if not self._propagate(store):
                self.fails += 1
                return
            try:
                ap = resolve_with_mask(ap, store.dom)
            except APInfeasible:
                self.fails += 1
                return
            if self._pruned(ap):
                self.fails += 1
                return
            before = store.mark()
            if not cost_filter(store, ap, self.ub, m.offset, m.scale):
                self.fails += 1
                return
            if store.mark() == before:
                break

        if store.all_bound():
            self._offer(store.bound)
            return
        if _is_tour(ap.assignment):
            self._offer(ap.assignment)
            if self._pruned(ap):
                return

        sizes = np.where(store.bound < 0, store.dom.sum(axis=1), store.n + 1)
        i = int(sizes.argmin())
        values = np.flatnonzero(store.dom[i])
        values = values[np.argsort(ap.reduced[i, values], kind="stable")]
        for j in values:
            if self._pruned(ap):
                break
            mark = store.mark()
            bind(store, i, int(j))
            self._node(store, ap)
            store.undo(mark)

    def run(self, store: DomainStore, ub: int | None = None, ap: APResult | None = None) -> SearchOutcome:
        """Best tour in the store's domains with cost below ``ub``."""
        self.ub = ub
        self.best = None
        mark = store.mark()
        timed_out = False
        try:
            if self._propagate(store):
                if ap is None:
                    ap = self.model.root_ap(store.dom)
                self._node(store, ap)
            else:
                self.fails += 1
        except APInfeasible:
            self.fails += 1
        except TimeLimitReached:
            timed_out = True
        finally:
            store.undo(mark)
        cost = None if self.best is None else self.inst.tour_cost(self.best)
        return SearchOutcome(self.best, cost, self.fails, self.nodes, timed_out)


def _is_tour(assignment) -> bool:
    n = len(assignment)
    node, steps = 0, 0
    while True:
        node = int(assignment[node])
        steps += 1
        if node == 0:
            return steps == n


def branch_and_bound(store: DomainStore, inst: Instance, ub: int | None = None, **options):
    """Minimum-cost feasible tour in the store's domains cheaper than ``ub``.

    Returns ``(tour, fails)`` with ``tour`` a successor list or None.
    """
    outcome = BranchAndBound(inst, **options).run(store, ub)
    return outcome.tour, outcome.fails
