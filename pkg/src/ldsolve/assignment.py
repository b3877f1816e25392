"""Linear assignment by shortest augmenting paths, with dual values.

Rows are inserted one at a time; each insertion is a Dijkstra search over
reduced costs (the Jonker-Volgenant / Hungarian scheme). Because duals stay
feasible and tight on the matched arcs, removing arcs only requires
re-inserting the rows whose matched arc disappeared: one O(n^2) augmentation
per freed row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ldsolve.instance import SENTINEL

_BIG = np.int64(1 << 62)


class APInfeasible(Exception):
    """No perfect matching exists on the available arcs."""


@dataclass(frozen=True, eq=False)
class APResult:
    assignment: np.ndarray  # row -> column
    row_duals: np.ndarray
    col_duals: np.ndarray
    reduced: np.ndarray  # SENTINEL on unavailable arcs
    lower_bound: int
    available: np.ndarray
    cost: np.ndarray

    @property
    def n(self) -> int:
        return len(self.assignment)


def _as_mask(cost: np.ndarray, domains) -> np.ndarray:
    n = cost.shape[0]
    if domains is None:
        return ~np.eye(n, dtype=bool)
    if isinstance(domains, np.ndarray):
        return domains.astype(bool, copy=True)
    mask = np.zeros((n, n), dtype=bool)
    for i, cols in enumerate(domains):
        mask[i, list(cols)] = True
    return mask


def _augment(cost, avail, u, v, owner, row) -> None:
    """Insert ``row`` into the matching ``owner`` (column -> row, -1 = free).

    ``v`` and ``owner`` carry one extra slot, index n, used as the root column.
    """
    n = cost.shape[0]
    root = n
    owner[root] = row
    minv = np.full(n, _BIG, dtype=np.int64)
    way = np.full(n, -1, dtype=np.int64)
    used = np.zeros(n + 1, dtype=bool)
    j0 = root
    while True:
        used[j0] = True
        i0 = owner[j0]
        cur = np.where(avail[i0], cost[i0] - u[i0] - v[:n], _BIG)
        free = ~used[:n]
        better = free & (cur < minv)
        minv[better] = cur[better]
        way[better] = j0
        cand = np.where(free, minv, _BIG)
        j1 = int(cand.argmin())  # lowest column index on ties
        delta = cand[j1]
        if delta >= _BIG:
            owner[root] = -1
            raise APInfeasible(f"row {row} cannot be matched")
        tree = np.flatnonzero(used)
        u[owner[tree]] += delta
        v[tree] -= delta
        minv[free & (minv < _BIG)] -= delta
        j0 = j1
        if owner[j0] < 0:
            break
    while j0 != root:
        j1 = way[j0]
        owner[j0] = owner[j1]
        j0 = j1
    owner[root] = -1
    v[root] = 0


def _result(cost, avail, u, v, owner) -> APResult:
    n = cost.shape[0]
    assignment = np.empty(n, dtype=np.int64)
    assignment[owner[:n]] = np.arange(n)
    u = u.copy()
    v = v[:n].copy()
    reduced = np.where(avail, cost - u[:, None] - v[None, :], SENTINEL)
    lb = int(u.sum() + v.sum())
    for arr in (assignment, u, v, reduced, avail):
        arr.setflags(write=False)
    return APResult(assignment, u, v, reduced, lb, avail, cost)


def solve_ap(cost: np.ndarray, domains=None) -> APResult:
    """Minimum-cost perfect matching over the arcs allowed by ``domains``.

    ``domains`` is a boolean n x n mask, a list of per-row column sets, or
    None for every off-diagonal arc.
    """
    cost = np.asarray(cost, dtype=np.int64)
    n = cost.shape[0]
    avail = _as_mask(cost, domains)
    if not avail.any(axis=1).all():
        raise APInfeasible(f"row {int(np.flatnonzero(~avail.any(axis=1))[0])} has an empty domain")
    u = np.where(avail, cost, _BIG).min(axis=1)
    v = np.zeros(n + 1, dtype=np.int64)
    owner = np.full(n + 1, -1, dtype=np.int64)
    for row in range(n):
        _augment(cost, avail, u, v, owner, row)
    return _result(cost, avail, u, v, owner)


def resolve_with_mask(prev: APResult, avail: np.ndarray) -> APResult:
    """Re-optimise ``prev`` after shrinking its available arcs to ``avail``."""
    n = prev.n
    avail = np.array(avail, dtype=bool)
    if (avail & ~prev.available).any():
        raise ValueError("resolve_with_mask can only remove arcs")
    rows = np.arange(n)
    lost = ~avail[rows, prev.assignment]
    if not lost.any():
        reduced = np.where(avail, prev.reduced, SENTINEL)
        avail.setflags(write=False)
        reduced.setflags(write=False)
        return APResult(prev.assignment, prev.row_duals, prev.col_duals, reduced,
                        prev.lower_bound, avail, prev.cost)
    u = prev.row_duals.copy()
    v = np.append(prev.col_duals, 0)
    owner = np.full(n + 1, -1, dtype=np.int64)
    owner[prev.assignment] = rows
    freed = np.flatnonzero(lost)
    owner[prev.assignment[freed]] = -1
    for row in freed:
        _augment(prev.cost, avail, u, v, owner, int(row))
    return _result(prev.cost, avail, u, v, owner)


def resolve_incremental(prev: APResult, removed_arcs) -> APResult:
    """Re-optimise after removing the given (i, j) arcs from the domains."""
    avail = prev.available.copy()
    for i, j in removed_arcs:
        avail[i, j] = False
    return resolve_with_mask(prev, avail)


def extract_cycles(assignment) -> list[list[int]]:
    """Orbits of a permutation, each starting at its smallest node."""
    n = len(assignment)
    seen = [False] * n
    cycles = []
    for start in range(n):
        if seen[start]:
            continue
        cycle = []
        node = start
        while not seen[node]:
            seen[node] = True
            cycle.append(node)
            node = int(assignment[node])
        cycles.append(cycle)
    return cycles
