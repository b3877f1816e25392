import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldsolve.instance import (SENTINEL, Instance, Kind, ParseError, format_ascheuer, format_tsplib,
                              load_instance, parse_ascheuer, parse_tsplib)

from conftest import SMALL_TSP, TSPLIB

FULL3 = """NAME: tri
TYPE: TSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: EXPLICIT
EDGE_WEIGHT_FORMAT: FULL_MATRIX
EDGE_WEIGHT_SECTION
0 1 1
1 0 1
1 1 0
EOF
"""


def header(fmt: str, n: int = 3) -> str:
    return (f"NAME: t\nTYPE: TSP\nDIMENSION: {n}\nEDGE_WEIGHT_TYPE: EXPLICIT\n"
            f"EDGE_WEIGHT_FORMAT: {fmt}\nEDGE_WEIGHT_SECTION\n")


def test_gr17_first_entry(gr17):
    assert gr17.n == 17
    assert gr17.cost[0, 1] == gr17.cost[1, 0] == 633
    assert gr17.symmetric


def test_gr17_checksum(gr17):
    off = ~np.eye(17, dtype=bool)
    # frozen from a plain token sum over the raw file section
    assert int(gr17.cost[off].sum()) == 2 * 37346


@pytest.mark.parametrize("name", SMALL_TSP)
def test_tsplib_files_parse(name):
    inst = load_instance(TSPLIB / f"{name}.tsp")
    assert inst.kind is Kind.TSP
    assert (np.diag(inst.cost) == SENTINEL).all()
    assert inst.symmetric
    assert inst.name == name


def test_full_matrix_all_ones():
    inst = parse_tsplib(FULL3)
    off = ~np.eye(3, dtype=bool)
    assert (inst.cost[off] == 1).all()
    assert inst.name == "tri"


@pytest.mark.parametrize("fmt, body", [
    ("LOWER_DIAG_ROW", "0\n4 0\n5 6 0"),
    ("LOWER_ROW", "4\n5 6"),
    ("UPPER_ROW", "4 5\n6"),
    ("UPPER_DIAG_ROW", "0 4 5\n0 6\n0"),
    ("UPPER_DIAG_ROW", "0 4 5 0 6 0"),  # wrapping is free
])
def test_triangular_formats(fmt, body):
    inst = parse_tsplib(header(fmt) + body + "\nEOF\n")
    assert inst.cost[0, 1] == inst.cost[1, 0] == 4
    assert inst.cost[0, 2] == inst.cost[2, 0] == 5
    assert inst.cost[1, 2] == inst.cost[2, 1] == 6


def test_missing_entry_names_row():
    text = header("LOWER_DIAG_ROW") + "0\n4 0\n5 0\nEOF\n"
    with pytest.raises(ParseError) as err:
        parse_tsplib(text)
    assert err.value.line == 9


@pytest.mark.parametrize("text", [
    "",
    "NAME: t\nTYPE: TSP\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1\n1 0\n",
    "NAME: t\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n",
    header("FUNKY", 2) + "0 1\n1 0\n",
    header("FULL_MATRIX", 2) + "0 x\n1 0\n",
    header("FULL_MATRIX", 2) + "0 1\n1 0 7\n",
])
def test_malformed_tsplib(text):
    with pytest.raises(ParseError):
        parse_tsplib(text)


def test_ascheuer_handcrafted():
    text = "3\n0 5 9\n4 0 7\n3 8 0\n0 1000\n0 1000\n0 1000\n"
    inst = parse_ascheuer(text)
    assert inst.kind is Kind.TSPTW
    assert inst.depot == (0, 2)
    assert inst.cost[0, 1] == 5 and inst.cost[1, 2] == 7 and inst.cost[0, 2] == 9
    assert inst.cost[1, 0] == 4 and inst.cost[2, 0] == 3 and inst.cost[2, 1] == 8
    assert (inst.windows == [[0, 1000]] * 3).all()


def test_ascheuer_inverted_window():
    with pytest.raises(ParseError) as err:
        parse_ascheuer("2\n0 1\n1 0\n0 10\n8 3\n")
    assert err.value.line == 5


def test_ascheuer_window_count_mismatch():
    with pytest.raises(ParseError):
        parse_ascheuer("2\n0 1\n1 0\n0 10\n")
    with pytest.raises(ParseError):
        parse_ascheuer("3\n0 1 2\n1 0\n")


def test_ascheuer_without_depot_copy():
    inst = parse_ascheuer("2\n0 4\n6 0\n0 50\n3 9\n", depot_copy=False)
    assert inst.n == 3 and inst.depot == (0, 2)
    assert inst.cost[1, 2] == 6 and inst.cost[0, 2] == 0
    assert tuple(inst.windows[2]) == (0, 50)


def test_load_instance_picks_reader(tmp_path):
    p = tmp_path / "tiny.tw"
    p.write_text("3\n0 5 9\n4 0 7\n3 8 0\n0 1000\n0 1000\n0 1000\n")
    assert load_instance(p).kind is Kind.TSPTW
    q = tmp_path / "tri.tsp"
    q.write_text(FULL3)
    assert load_instance(q).kind is Kind.TSP


def test_instance_validation():
    with pytest.raises(ValueError):
        Instance(n=2, cost=[[0, -1], [1, 0]])
    with pytest.raises(ValueError):
        Instance(n=2, cost=[[0, 1], [1, 0]], windows=[[0, 5], [6, 2]], kind=Kind.TSPTW)
    with pytest.raises(ValueError):
        Instance(n=2, cost=[[0, 1], [1, 0]], kind=Kind.TSPTW)
    with pytest.raises(ValueError):
        Instance(n=3, cost=[[0, 1], [1, 0]])


def test_instance_is_read_only(gr17):
    with pytest.raises(ValueError):
        gr17.cost[0, 1] = 5


def test_tsptw_tour_cost_skips_return_arc():
    inst = parse_ascheuer("3\n0 5 9\n4 0 7\n3 8 0\n0 1000\n0 1000\n0 1000\n")
    assert inst.tour_cost([1, 2, 0]) == 12


matrices = st.integers(2, 7).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 10_000), min_size=n, max_size=n), min_size=n, max_size=n))


@given(matrices)
def test_tsplib_roundtrip(rows):
    inst = Instance(n=len(rows), cost=rows, name="rt")
    assert parse_tsplib(format_tsplib(inst)) == inst


@given(matrices, st.data())
def test_ascheuer_roundtrip(rows, data):
    n = len(rows)
    a = data.draw(st.lists(st.integers(0, 500), min_size=n, max_size=n))
    w = [[x, x + data.draw(st.integers(0, 500))] for x in a]
    inst = Instance(n=n, cost=rows, windows=w, kind=Kind.TSPTW, depot=(0, n - 1))
    assert parse_ascheuer(format_ascheuer(inst)) == inst


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_symmetric_expansion(n, seed):
    rng = np.random.default_rng(seed)
    lower = [rng.integers(0, 99, size=i + 1).tolist() for i in range(n)]
    body = "\n".join(" ".join(map(str, r[:-1] + [0])) for r in lower)
    inst = parse_tsplib(header("LOWER_DIAG_ROW", n) + body + "\nEOF\n")
    assert inst.symmetric
    for i in range(n):
        for j in range(i):
            assert inst.cost[i, j] == lower[i][j]
