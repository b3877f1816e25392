from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ldsolve.instance import Instance, Kind, load_instance

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).resolve().parent.parent / "data"
TSPLIB = DATA / "tsplib"
ASCHEUER = DATA / "ascheuer"

SMALL_TSP = ["gr17", "gr21", "gr24", "fri26", "bayg29", "bays29"]


@pytest.fixture(scope="session")
def gr17():
    return load_instance(TSPLIB / "gr17.tsp")


def random_tsp(rng: np.random.Generator, n: int, symmetric: bool = False, high: int = 100) -> Instance:
    c = rng.integers(0, high, size=(n, n))
    if symmetric:
        c = np.triu(c, 1)
        c = c + c.T
    return Instance(n=n, cost=c)


def random_tsptw(rng: np.random.Generator, n: int) -> Instance:
    c = rng.integers(1, 30, size=(n, n))
    a = rng.integers(0, 60, size=n)
    w = np.stack([a, a + rng.integers(5, 80, size=n)], axis=1)
    w[0] = [0, 0]
    w[-1] = [0, 500]
    return Instance(n=n, cost=c, windows=w, kind=Kind.TSPTW)
