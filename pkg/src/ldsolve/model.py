"""Next-variable model shared by the relaxation and the search.

A TSPTW route start -> ... -> end is handled as a tour by forcing
Next[end] = start on a free arc.
"""

from __future__ import annotations

import numpy as np

from ldsolve.instance import Instance, Kind


def relaxation_cost(inst: Instance) -> np.ndarray:
    cost = np.array(inst.cost)
    if inst.kind is Kind.TSPTW:
        start, end = inst.depot
        cost[end, start] = 0
    return cost


def initial_domains(inst: Instance) -> np.ndarray:
    """Boolean mask of allowed (i, Next_i) pairs before any propagation."""
    dom = ~np.eye(inst.n, dtype=bool)
    if inst.kind is Kind.TSPTW:
        start, end = inst.depot
        dom[end, :] = False
        dom[:, start] = False
        dom[end, start] = True
        if inst.n > 2:
            dom[start, end] = False
    return dom


def route_order(succ, start: int = 0) -> list[int]:
    """Nodes in visiting order following a successor array from ``start``."""
    order = [start]
    node = int(succ[start])
    while node != start and len(order) <= len(succ):
        order.append(node)
        node = int(succ[node])
    return order


def schedule(inst: Instance, order) -> list[int] | None:
    """Service start times along ``order`` (waiting allowed), None if a deadline is missed."""
    a, b = inst.windows[:, 0], inst.windows[:, 1]
    t = int(a[order[0]])
    times = [t]
    for prev, node in zip(order, order[1:]):
        t = max(t + int(inst.cost[prev, node]), int(a[node]))
        if t > b[node]:
            return None
        times.append(t)
    return times


def is_feasible(inst: Instance, succ) -> bool:
    n = inst.n
    succ = [int(s) for s in succ]
    if sorted(succ) != list(range(n)):
        return False
    start = inst.depot[0] if inst.kind is Kind.TSPTW else 0
    order = route_order(succ, start)
    if len(order) != n:
        return False
    if inst.kind is Kind.TSPTW:
        return order[-1] == inst.depot[1] and schedule(inst, order) is not None
    return True


def greedy_tour(inst: Instance, avail: np.ndarray | None = None) -> list[int] | None:
    """Nearest-neighbour successor array, respecting windows for TSPTW.

    Returns None when the greedy walk gets stuck.
    """
    n = inst.n
    if avail is None:
        avail = initial_domains(inst)
    if inst.kind is Kind.TSP:
        order = [0]
        left = set(range(1, n))
        while left:
            here = order[-1]
            options = [j for j in left if avail[here, j]]
            if not options:
                return None
            nxt = min(options, key=lambda j: (inst.cost[here, j], j))
            order.append(nxt)
            left.remove(nxt)
        if not avail[order[-1], order[0]]:
            return None
        return _succ_from_order(order, n)

    start, end = inst.depot
    a, b = inst.windows[:, 0], inst.windows[:, 1]
    # two greedy rules: nearest reachable node, or most urgent deadline
    for rule in ("nearest", "deadline"):
        order, t = [start], int(a[start])
        left = set(range(n)) - {start, end}
        stuck = False
        while left:
            here = order[-1]
            options = [j for j in left if avail[here, j] and max(t + inst.cost[here, j], a[j]) <= b[j]]
            if not options:
                stuck = True
                break
            if rule == "nearest":
                nxt = min(options, key=lambda j: (max(t + inst.cost[here, j], a[j]), j))
            else:
                nxt = min(options, key=lambda j: (b[j], j))
            t = max(t + int(inst.cost[here, nxt]), int(a[nxt]))
            order.append(nxt)
            left.remove(nxt)
        if stuck or not avail[order[-1], end] or t + inst.cost[order[-1], end] > b[end]:
            continue
        order.append(end)
        return _succ_from_order(order, n)
    return None


def _succ_from_order(order, n) -> list[int]:
    succ = [0] * n
    for here, nxt in zip(order, order[1:] + order[:1]):
        succ[here] = nxt
    return succ
