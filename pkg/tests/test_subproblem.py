import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldsolve.instance import Instance, Kind
from ldsolve.model import greedy_tour, initial_domains, is_feasible, schedule
from ldsolve.oracle import held_karp, tsptw_enumerate
from ldsolve.store import DomainStore
from ldsolve.subproblem import (BranchAndBound, bind, branch_and_bound, cost_filter, propagate_nocycle,
                                propagate_time_windows)
from ldsolve.assignment import solve_ap

from conftest import random_tsp, random_tsptw


def test_trail_restores_everything():
    inst = Instance(n=5, cost=np.ones((5, 5), dtype=int) * 3, windows=[[0, 100]] * 5, kind=Kind.TSPTW)
    store = DomainStore(initial_domains(inst), inst)
    before = store.snapshot()
    mark = store.mark()
    bind(store, 0, 2)
    store.remove(1, 3)
    store.assign(store.est, 3, 42)
    assert store.is_bound(0)
    store.undo(mark)
    after = store.snapshot()
    assert all((a == b).all() for a, b in zip(before, after))


def test_bind_merges_chains_and_blocks_closure():
    store = DomainStore(~np.eye(5, dtype=bool))
    bind(store, 0, 1)
    bind(store, 1, 2)
    assert not store.dom[2, 0]  # closing 0->1->2->0 would be a subtour
    assert store.head[2] == 0 and store.tail[0] == 2 and store.count[0] == 3
    assert np.flatnonzero(store.dom[:, 1]).tolist() == [0]
    assert np.flatnonzero(store.dom[0]).tolist() == [1]


def test_full_chain_may_close():
    store = DomainStore(~np.eye(3, dtype=bool))
    bind(store, 0, 1)
    bind(store, 1, 2)
    assert propagate_nocycle(store)
    assert store.all_bound() and list(store.bound) == [1, 2, 0]


def test_nocycle_detects_dead_end():
    dom = np.zeros((4, 4), dtype=bool)
    dom[0, 1] = dom[1, 0] = True
    dom[2, 3] = dom[3, 2] = True
    store = DomainStore(dom)
    assert not propagate_nocycle(store)


def test_column_singleton_forces_bind():
    dom = ~np.eye(4, dtype=bool)
    dom[[1, 2], 3] = False  # only 0 can precede 3
    store = DomainStore(dom)
    assert propagate_nocycle(store)
    assert store.bound[0] == 3


def test_time_windows_tighten_and_prune():
    cost = np.array([[0, 5, 5, 0], [5, 0, 5, 5], [5, 5, 0, 5], [0, 5, 5, 0]])
    windows = [[0, 0], [0, 6], [0, 100], [0, 100]]
    inst = Instance(n=4, cost=cost, windows=windows, kind=Kind.TSPTW)
    store = DomainStore(initial_domains(inst), inst)
    assert propagate_time_windows(store, inst)
    assert store.est[1] == 5 and store.est[2] == 5
    assert not store.dom[2, 1]  # leaving 2 at 5 reaches 1 at 10 > 6


def test_time_windows_fail():
    cost = np.array([[0, 9, 0], [9, 0, 9], [0, 9, 0]])
    inst = Instance(n=3, cost=cost, windows=[[0, 0], [0, 5], [0, 100]], kind=Kind.TSPTW)
    store = DomainStore(initial_domains(inst), inst)
    assert not propagate_time_windows(store, inst)


def test_cost_filter_removes_expensive_arcs(gr17):
    ap = solve_ap(gr17.cost)
    store = DomainStore(~np.eye(17, dtype=bool))
    assert cost_filter(store, ap, ap.lower_bound + 10)
    keep = ap.reduced <= 9
    assert (store.dom == (keep & ~np.eye(17, dtype=bool))).all()
    assert cost_filter(store, ap, None)


def test_schedule_waits_and_fails():
    inst = Instance(n=3, cost=[[0, 2, 1], [1, 0, 3], [0, 1, 0]], windows=[[0, 0], [5, 9], [0, 9]],
                    kind=Kind.TSPTW)
    assert schedule(inst, [0, 1, 2]) == [0, 5, 8]
    inst2 = Instance(n=3, cost=[[0, 2, 1], [1, 0, 3], [0, 1, 0]], windows=[[0, 0], [5, 9], [0, 7]],
                     kind=Kind.TSPTW)
    assert schedule(inst2, [0, 1, 2]) is None
    assert not is_feasible(inst2, [1, 2, 0])


def test_window_forced_order():
    cost = np.full((5, 5), 1)
    windows = [[0, 0], [1, 1], [2, 2], [3, 3], [0, 100]]
    inst = Instance(n=5, cost=cost, windows=windows, kind=Kind.TSPTW)
    assert tsptw_enumerate(inst) == (4, [1, 2, 3, 4, 0])
    tour, _ = branch_and_bound(DomainStore(initial_domains(inst), inst), inst)
    assert tour == [1, 2, 3, 4, 0]


def test_greedy_tour_is_feasible(gr17):
    succ = greedy_tour(gr17)
    assert is_feasible(gr17, succ)


def test_ub_excludes_equal_cost(gr17):
    opt = held_karp(gr17)[0]
    tour, fails = branch_and_bound(DomainStore(initial_domains(gr17)), gr17, ub=opt)
    assert tour is None
    tour, _ = branch_and_bound(DomainStore(initial_domains(gr17)), gr17, ub=opt + 1)
    assert gr17.tour_cost(tour) == opt


def test_time_limit_flags_incomplete(gr17):
    import time

    bnb = BranchAndBound(gr17, deadline=time.monotonic() - 1)
    out = bnb.run(DomainStore(initial_domains(gr17)))
    assert out.timed_out and out.tour is None


@settings(max_examples=60)
@given(st.integers(3, 8), st.integers(0, 2**32 - 1))
def test_bnb_matches_held_karp(n, seed):
    rng = np.random.default_rng(seed)
    inst = random_tsp(rng, n, symmetric=bool(seed % 2))
    store = DomainStore(initial_domains(inst))
    before = store.snapshot()
    tour, fails = branch_and_bound(store, inst)
    assert fails >= 0
    assert inst.tour_cost(tour) == held_karp(inst)[0]
    assert all((a == b).all() for a, b in zip(before, store.snapshot()))


@settings(max_examples=60)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_bnb_matches_tsptw_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    inst = random_tsptw(rng, n)
    expected = tsptw_enumerate(inst)
    tour, _ = branch_and_bound(DomainStore(initial_domains(inst), inst), inst)
    if expected is None:
        assert tour is None
    else:
        assert is_feasible(inst, tour)
        assert inst.tour_cost(tour) == expected[0]


@given(st.integers(3, 6), st.integers(0, 2**32 - 1))
def test_nocycle_never_removes_tours(n, seed):
    rng = np.random.default_rng(seed)
    dom = rng.random((n, n)) < 0.7
    np.fill_diagonal(dom, False)
    store = DomainStore(dom)
    ok = propagate_nocycle(store)
    for rest in itertools.permutations(range(1, n)):
        order = (0, *rest)
        succ = [0] * n
        for a, b in zip(order, order[1:] + order[:1]):
            succ[a] = b
        if dom[np.arange(n), succ].all():
            assert ok and store.dom[np.arange(n), succ].all()
