"""Assignment bound strengthened by Lagrangean subtour elimination cuts.

Each cut S asks that at least one arc leaves S. Its multiplier is moved into
the arc costs (arcs leaving S get cheaper by lambda_S) and added back as a
constant, so every iterate is still an assignment problem. Multipliers are
kept as integers in units of 1/SCALE, which keeps the assignment arithmetic
exact.

Cuts come from two places: the cycles of each assignment iterate, and a
global minimum cut of a running average of the iterates (that average tends
towards the fractional optimum, whose violated sets the cycles alone rarely
expose).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from ldsolve.assignment import APResult, extract_cycles, solve_ap
from ldsolve.instance import Instance
from ldsolve.model import greedy_tour, initial_domains, relaxation_cost

SCALE = 1 << 16


@dataclass
class Cut:
    node_set: frozenset[int]
    multiplier: int = 0  # lambda_S * SCALE

    @property
    def value(self) -> Fraction:
        return Fraction(self.multiplier, SCALE)


@dataclass
class SubgradientParams:
    max_iterations: int = 150
    mu: float = 2.0
    patience: int = 5  # non-improving iterations before mu is halved
    min_mu: float = 1e-4
    averaging: float = 0.1  # weight of the newest iterate in the running average
    mincut: bool = True


@dataclass
class LagrangeanState:
    cuts: list[Cut]
    modified_cost: np.ndarray  # scaled, at the best multipliers
    best_scaled: int  # best bound times SCALE
    ap_at_best: APResult
    plain_bound: int
    iterations: int = 0
    history: list[int] = field(default_factory=list)

    @property
    def best_bound(self) -> Fraction:
        return Fraction(self.best_scaled, SCALE)

    @property
    def penalty(self) -> int:
        """Sum of multipliers (scaled): the constant term of the bound."""
        return sum(c.multiplier for c in self.cuts)


def separate_subtours(ap: APResult) -> list[Cut]:
    """One cut per cycle of a non-Hamiltonian assignment."""
    cycles = extract_cycles(ap.assignment)
    if len(cycles) == 1:
        return []
    return [Cut(frozenset(c)) for c in cycles]


def _membership(cuts: list[Cut], n: int) -> np.ndarray:
    m = np.zeros((len(cuts), n), dtype=bool)
    for k, cut in enumerate(cuts):
        m[k, list(cut.node_set)] = True
    return m


def penalty_matrix(cuts: list[Cut], n: int) -> np.ndarray:
    """P[i, j] = sum of multipliers of cuts with i in S and j outside S."""
    if not cuts:
        return np.zeros((n, n), dtype=np.int64)
    m = _membership(cuts, n).astype(np.int64)
    lam = np.array([c.multiplier for c in cuts], dtype=np.int64)
    return (m.T * lam) @ (1 - m)


def crossings(cuts: list[Cut], assignment) -> np.ndarray:
    """Number of assignment arcs leaving each cut set."""
    m = _membership(cuts, len(assignment))
    return (m & ~m[:, np.asarray(assignment)]).sum(axis=1)


def violated_sets(x: np.ndarray, tol: float = 1e-6) -> list[frozenset[int]]:
    """Node sets whose outflow under the fractional assignment ``x`` is below 1.

    Returns the components of the support when it is disconnected, else the
    side of a global minimum cut if that cut is violated.
    """
    n = x.shape[0]
    w = x + x.T
    g = nx.Graph()
    g.add_nodes_from(range(n))
    rows, cols = np.nonzero(np.triu(w, 1) > tol)
    g.add_weighted_edges_from((int(i), int(j), float(w[i, j])) for i, j in zip(rows, cols))
    if not nx.is_connected(g):
        return [frozenset(c) for c in nx.connected_components(g)]
    value, (side, _) = nx.stoer_wagner(g)
    # in- and outflow of a set agree for assignments, so the symmetric cut is twice the outflow
    if value < 2 - tol:
        return [frozenset(side)]
    return []


def _upper_estimate(inst: Instance, avail: np.ndarray) -> int:
    succ = greedy_tour(inst, avail)
    if succ is not None:
        return inst.tour_cost(succ)
    cost = relaxation_cost(inst)
    return int(np.where(avail, cost, 0).max(axis=1).sum())


def subgradient_optimize(inst: Instance, params: SubgradientParams | None = None,
                         domains: np.ndarray | None = None) -> LagrangeanState:
    """Maximise the Lagrangean bound over subtour cut multipliers."""
    params = params or SubgradientParams()
    n = inst.n
    avail = initial_domains(inst) if domains is None else np.asarray(domains, dtype=bool)
    base = np.where(avail, relaxation_cost(inst) * SCALE, 0)

    ap = solve_ap(base, avail)
    plain = ap.lower_bound // SCALE
    state = LagrangeanState(cuts=[], modified_cost=base, best_scaled=ap.lower_bound,
                            ap_at_best=ap, plain_bound=plain, history=[ap.lower_bound])
    if len(extract_cycles(ap.assignment)) == 1 or params.max_iterations <= 0:
        return state

    target = _upper_estimate(inst, avail) * SCALE
    pool: dict[frozenset, Cut] = {}
    best_lams: dict[frozenset, int] = {}
    mu = params.mu
    stall = 0
    value = ap.lower_bound
    xbar = np.zeros((n, n))
    xbar[np.arange(n), ap.assignment] = 1.0
    for it in range(1, params.max_iterations + 1):
        for cut in separate_subtours(ap):
            pool.setdefault(cut.node_set, cut)
        if params.mincut:
            for s in violated_sets(xbar):
                if len(s) < n:
                    pool.setdefault(s, Cut(s))
        cuts = list(pool.values())
        g = 1 - crossings(cuts, ap.assignment)
        lam = np.array([c.multiplier for c in cuts], dtype=np.int64)
        g[(lam == 0) & (g < 0)] = 0
        norm = int((g * g).sum())
        if norm == 0:
            # assignment is a tour crossing every weighted cut once: optimal
            state.iterations = it - 1
            break
        step = mu * max(target - value, SCALE) / norm
        for cut, gk in zip(cuts, g):
            cut.multiplier = max(0, cut.multiplier + int(round(step * gk)))
        modified = base - penalty_matrix(cuts, n)
        ap = solve_ap(modified, avail)
        value = ap.lower_bound + sum(c.multiplier for c in cuts)
        xbar *= 1 - params.averaging
        xbar[np.arange(n), ap.assignment] += params.averaging
        state.history.append(value)
        state.iterations = it
        if value > state.best_scaled:
            state.best_scaled = value
            state.ap_at_best = ap
            state.modified_cost = modified
            best_lams = {c.node_set: c.multiplier for c in cuts}
            stall = 0
        else:
            stall += 1
            if stall >= params.patience:
                mu /= 2
                stall = 0
        if mu < params.min_mu or state.best_scaled >= target:
            break

    state.cuts = [Cut(s, lam) for s, lam in best_lams.items() if lam > 0]
    return state
