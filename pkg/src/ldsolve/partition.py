"""Good/bad domain partitioning by reduced cost, and the discrepancy bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ldsolve.instance import SENTINEL


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Partition:
    good: np.ndarray  # bool mask, row i = D_i^good
    bad: np.ndarray  # bool mask, row i = D_i^bad
    l_list: tuple[int, ...]  # sorted minimum bad reduced costs, SENTINEL for empty bad sets
    ratio: float
    order: tuple[tuple[int, ...], ...]  # D_i by increasing reduced cost

    @property
    def n(self) -> int:
        return self.good.shape[0]

    def good_values(self, i: int) -> list[int]:
        return [j for j in self.order[i] if self.good[i, j]]

    def bad_values(self, i: int) -> list[int]:
        return [j for j in self.order[i] if self.bad[i, j]]

    @property
    def size(self) -> float:
        """Mean relative size of the good sets, (1/n) sum |D_i^good| / |D_i|."""
        dom = (self.good | self.bad).sum(axis=1)
        keep = dom > 0
        return float((self.good.sum(axis=1)[keep] / dom[keep]).mean())

    @property
    def branching_count(self) -> int:
        """Variables with a nonempty bad set, i.e. the largest useful discrepancy."""
        return int(self.bad.any(axis=1).sum())


def good_set_size(ratio: float, n: int, domain_size: int) -> int:
    return min(domain_size, max(1, math.floor(ratio * n + 0.5)))


def partition_domains(reduced: np.ndarray, domains: np.ndarray, ratio: float) -> Partition:
    """Keep the values with the lowest reduced costs of every domain as its good set.

    Values tied with the last kept reduced cost are kept too.
    """
    if not 0 < ratio <= 1:
        raise ConfigError(f"ratio must lie in (0, 1], got {ratio}")
    reduced = np.asarray(reduced)
    domains = np.asarray(domains, dtype=bool)
    n = domains.shape[0]
    good = np.zeros_like(domains)
    order = []
    mins = []
    for i in range(n):
        values = np.flatnonzero(domains[i])
        # stable sort: ties by ascending value
        ranked = values[np.argsort(reduced[i, values], kind="stable")]
        order.append(tuple(int(j) for j in ranked))
        if len(ranked) == 0:
            continue
        m = good_set_size(ratio, n, len(ranked))
        cutoff = reduced[i, ranked[m - 1]]
        good[i, values[reduced[i, values] <= cutoff]] = True
    bad = domains & ~good
    for i in range(n):
        if bad[i].any():
            mins.append(int(reduced[i, bad[i]].min()))
    l_list = sorted(mins) + [SENTINEL] * (n - len(mins))
    return Partition(good=good, bad=bad, l_list=tuple(l_list), ratio=ratio, order=tuple(order))


def bound_for_discrepancy(lb0: int, part: Partition, k: int) -> int:
    """LB_0 plus the k smallest bad-set reduced costs.

    Valid for every solution with exactly k variables on a bad value. Once k
    exceeds the number of nonempty bad sets the SENTINEL entries push it past
    any real tour cost.
    """
    if not 0 <= k <= part.n:
        raise ValueError(f"discrepancy {k} outside 0..{part.n}")
    return lb0 + sum(part.l_list[:k])
