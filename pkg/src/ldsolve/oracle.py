"""Independent exact solvers used as ground truth in tests and benchmarks.

None of these share code with the search: brute-force assignment, the
Held-Karp dynamic program, a MILP with lazily added subtour constraints for
sizes beyond Held-Karp, and exhaustive enumeration for TSPTW.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

from ldsolve.instance import Instance, Kind
from ldsolve.model import schedule

BRUTE_AP_MAX = 9
HELD_KARP_MAX = 21
TSPTW_ENUM_MAX = 10


class OracleRefused(ValueError):
    """The instance is too large for the requested exact method."""


def brute_force_ap(cost: np.ndarray, domains: np.ndarray | None = None) -> tuple[int, tuple[int, ...]] | None:
    """Minimum-cost permutation by enumeration; None if the domains allow none."""
    cost = np.asarray(cost)
    n = cost.shape[0]
    if n > BRUTE_AP_MAX:
        raise OracleRefused(f"brute-force assignment limited to n <= {BRUTE_AP_MAX}, got {n}")
    best = None
    rows = np.arange(n)
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        if domains is not None and not domains[rows, p].all():
            continue
        c = int(cost[rows, p].sum())
        if best is None or c < best[0]:
            best = (c, perm)
    return best


def held_karp(inst_or_cost) -> tuple[int, list[int]]:
    """Optimal TSP tour by dynamic programming over subsets.

    Returns (cost, successor list). The table is processed one subset size at
    a time so that every step is a vectorised numpy operation.
    """
    cost = _cost(inst_or_cost)
    n = cost.shape[0]
    if n > HELD_KARP_MAX:
        raise OracleRefused(f"Held-Karp limited to n <= {HELD_KARP_MAX}, got {n}")
    if n == 1:
        return 0, [0]
    m = n - 1  # node 0 is the fixed start; subsets range over nodes 1..n-1
    full = 1 << m
    big = np.iinfo(np.int64).max // 4
    dp = np.full((full, m), big, dtype=np.int64)
    parent = np.full((full, m), -1, dtype=np.int8 if m < 127 else np.int16)
    c = cost[1:, 1:].astype(np.int64)
    masks = np.arange(full)
    popcount = np.zeros(full, dtype=np.int64)
    for b in range(m):
        popcount += (masks >> b) & 1
    for j in range(m):
        dp[1 << j, j] = cost[0, j + 1]
    for size in range(2, m + 1):
        layer = masks[popcount == size]
        for j in range(m):
            sub = layer[(layer >> j) & 1 == 1]
            prev = sub ^ (1 << j)
            # best predecessor k in prev for ending at j
            cand = dp[prev] + c[:, j][None, :]
            k = cand.argmin(axis=1)
            dp[sub, j] = cand[np.arange(len(sub)), k]
            parent[sub, j] = k
    last = dp[full - 1] + cost[1:, 0]
    j = int(last.argmin())
    total = int(last[j])
    order = []
    mask = full - 1
    while j >= 0:
        order.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj if mask else -1
    order = [0] + order[::-1]
    succ = [0] * n
    for a, b in zip(order, order[1:] + order[:1]):
        succ[a] = b
    return total, succ


def milp_tsp(inst_or_cost, time_limit: float = 300.0) -> tuple[int, list[int]]:
    """Optimal TSP tour by integer programming with lazily added subtour cuts."""
    cost = _cost(inst_or_cost)
    n = cost.shape[0]
    if n <= 2:
        return held_karp(cost)
    arcs = [(i, j) for i in range(n) for j in range(n) if i != j]
    idx = {a: k for k, a in enumerate(arcs)}
    c = np.array([cost[i, j] for i, j in arcs], dtype=float)
    rows, cols = [], []
    for k, (i, j) in enumerate(arcs):
        rows += [i, n + j]
        cols += [k, k]
    a_deg = sp.csr_array((np.ones(len(rows)), (rows, cols)), shape=(2 * n, len(arcs)))
    constraints = [LinearConstraint(a_deg, 1, 1)]
    while True:
        res = milp(c, constraints=constraints, integrality=np.ones(len(arcs)),
                   bounds=Bounds(0, 1), options={"time_limit": time_limit})
        if res.x is None:
            raise RuntimeError(f"MILP failed: {res.message}")
        succ = [0] * n
        for k in np.flatnonzero(res.x > 0.5):
            i, j = arcs[k]
            succ[i] = j
        cycles = _cycles(succ)
        if len(cycles) == 1:
            return int(round(res.fun)), succ
        for cyc in cycles:
            s = set(cyc)
            row = np.zeros(len(arcs))
            for i in cyc:
                for j in range(n):
                    if j not in s:
                        row[idx[i, j]] = 1
            constraints.append(LinearConstraint(row[None, :], 1, np.inf))


def tsp_optimum(inst_or_cost) -> tuple[int, list[int]]:
    """Held-Karp when it fits, integer programming beyond."""
    n = _cost(inst_or_cost).shape[0]
    return held_karp(inst_or_cost) if n <= HELD_KARP_MAX else milp_tsp(inst_or_cost)


def tsptw_enumerate(inst: Instance) -> tuple[int, list[int]] | None:
    """Best feasible start->end route over all orders of the customers; None if infeasible."""
    if inst.kind is not Kind.TSPTW:
        raise ValueError("tsptw_enumerate needs a TSPTW instance")
    n = inst.n
    if n > TSPTW_ENUM_MAX:
        raise OracleRefused(f"TSPTW enumeration limited to n <= {TSPTW_ENUM_MAX}, got {n}")
    start, end = inst.depot
    middle = [v for v in range(n) if v not in (start, end)]
    best = None
    for perm in itertools.permutations(middle):
        order = [start, *perm, end] if start != end else [start, *perm]
        if schedule(inst, order) is None:
            continue
        c = sum(int(inst.cost[a, b]) for a, b in zip(order, order[1:]))
        if best is None or c < best[0]:
            best = (c, order)
    if best is None:
        return None
    succ = [0] * n
    for a, b in zip(best[1], best[1][1:] + best[1][:1]):
        succ[a] = b
    return best[0], succ


def _cost(inst_or_cost) -> np.ndarray:
    if isinstance(inst_or_cost, Instance):
        return np.array(inst_or_cost.cost, dtype=np.int64)
    return np.asarray(inst_or_cost, dtype=np.int64)


def _cycles(succ) -> list[list[int]]:
    seen = [False] * len(succ)
    out = []
    for s in range(len(succ)):
        if seen[s]:
            continue
        cyc, v = [], s
        while not seen[v]:
            seen[v] = True
            cyc.append(v)
            v = succ[v]
        out.append(cyc)
    return out
