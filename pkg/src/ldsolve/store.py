"""Backtrackable domains for the Next variables (plus time bounds for TSPTW)."""

from __future__ import annotations

import numpy as np

from ldsolve.instance import Instance, Kind


class DomainStore:
    """Domains as an n x n boolean mask with a trail of reversible changes.

    Also tracks the chains formed by bound variables: ``head[t]`` is the
    first node of the chain ending at ``t``, ``tail[h]`` the last node of the
    chain starting at ``h`` and ``count[h]`` its number of nodes.
    """

    def __init__(self, domains: np.ndarray, inst: Instance | None = None):
        self.dom = np.array(domains, dtype=bool)
        self.n = self.dom.shape[0]
        self.bound = np.full(self.n, -1, dtype=np.int64)
        self.head = np.arange(self.n)
        self.tail = np.arange(self.n)
        self.count = np.ones(self.n, dtype=np.int64)
        self.est = self.lst = None
        if inst is not None and inst.kind is Kind.TSPTW:
            self.est = np.array(inst.windows[:, 0], dtype=np.int64)
            self.lst = np.array(inst.windows[:, 1], dtype=np.int64)
        self._trail: list = []

    # ---------------------------------------------------------------- trail

    def mark(self) -> int:
        return len(self._trail)

    def undo(self, mark: int) -> None:
        trail = self._trail
        while len(trail) > mark:
            entry = trail.pop()
            if entry[0] is None:
                self.dom[entry[1], entry[2]] = True
            else:
                entry[0][entry[1]] = entry[2]

    def assign(self, arr: np.ndarray, idx, value) -> None:
        """Reversible ``arr[idx] = value``."""
        self._trail.append((arr, idx, np.copy(arr[idx])))
        arr[idx] = value

    # -------------------------------------------------------------- domains

    def remove_mask(self, mask: np.ndarray) -> int:
        """Remove every (i, j) set in ``mask``; returns how many were present."""
        rows, cols = np.nonzero(mask & self.dom)
        if len(rows):
            self.dom[rows, cols] = False
            self._trail.append((None, rows, cols))
        return len(rows)

    def remove(self, i: int, j: int) -> bool:
        if not self.dom[i, j]:
            return False
        self.dom[i, j] = False
        self._trail.append((None, np.array([i]), np.array([j])))
        return True

    def restrict(self, i: int, values: np.ndarray) -> int:
        """Intersect D_i with the boolean row ``values``."""
        row = np.zeros_like(self.dom)
        row[i] = ~values
        return self.remove_mask(row)

    def size(self, i: int) -> int:
        return int(self.dom[i].sum())

    def is_bound(self, i: int) -> bool:
        return self.bound[i] >= 0

    def all_bound(self) -> bool:
        return bool((self.bound >= 0).all())

    def snapshot(self) -> tuple:
        """Copy of the full state, for tests of trail restoration."""
        parts = [self.dom, self.bound, self.head, self.tail, self.count]
        if self.est is not None:
            parts += [self.est, self.lst]
        return tuple(p.copy() for p in parts)
