"""Problem instances and readers for TSPLIB and Ascheuer (rbg) files.

Node indices are 0-based everywhere; the files themselves use 1-based
labels and we translate on the way in.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: diagonal marker for c_ii; two of them still fit in an int64
SENTINEL: int = int(np.iinfo(np.int64).max // 4)


class Kind(enum.Enum):
    TSP = "TSP"
    TSPTW = "TSPTW"


class ParseError(ValueError):
    """Raised on malformed instance text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    cost: np.ndarray
    windows: np.ndarray | None = None
    kind: Kind = Kind.TSP
    depot: tuple[int, int] | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        cost = np.array(self.cost, dtype=np.int64)
        if self.n < 2 or cost.shape != (self.n, self.n):
            raise ValueError(f"cost matrix must be {self.n}x{self.n}, got {cost.shape}")
        np.fill_diagonal(cost, SENTINEL)
        off = ~np.eye(self.n, dtype=bool)
        if (cost[off] < 0).any():
            raise ValueError("arc costs must be non-negative")
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        if self.kind is Kind.TSPTW:
            if self.windows is None:
                raise ValueError("TSPTW instance needs time windows")
            if self.depot is None:
                object.__setattr__(self, "depot", (0, self.n - 1))
        if self.windows is not None:
            w = np.array(self.windows, dtype=np.int64).reshape(self.n, 2)
            if (w[:, 0] > w[:, 1]).any():
                bad = int(np.flatnonzero(w[:, 0] > w[:, 1])[0])
                raise ValueError(f"node {bad} has an inverted window {tuple(w[bad])}")
            w.setflags(write=False)
            object.__setattr__(self, "windows", w)

    @property
    def symmetric(self) -> bool:
        return bool((self.cost == self.cost.T).all())

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        same_windows = (self.windows is None and other.windows is None) or (
            self.windows is not None
            and other.windows is not None
            and np.array_equal(self.windows, other.windows)
        )
        return (
            self.n == other.n
            and self.kind == other.kind
            and self.depot == other.depot
            and self.name == other.name
            and np.array_equal(self.cost, other.cost)
            and same_windows
        )

    __hash__ = None

    def tour_cost(self, succ) -> int:
        """Cost of a successor array (``succ[i]`` is the node after ``i``).

        For TSPTW the closing arc end -> start is free.
        """
        total = 0
        for i, j in enumerate(succ):
            if self.kind is Kind.TSPTW and (i, j) == (self.depot[1], self.depot[0]):
                continue
            total += int(self.cost[i, j])
        return total


# --------------------------------------------------------------------- TSPLIB

_WEIGHT_FORMATS = ("FULL_MATRIX", "LOWER_DIAG_ROW", "LOWER_ROW", "UPPER_ROW", "UPPER_DIAG_ROW")
_KEYWORD = re.compile(r"^[A-Z_]+")


def _row_cells(fmt: str, n: int) -> list[list[tuple[int, int]]]:
    """Matrix cells (i, j) in file order, grouped by file row."""
    if fmt == "FULL_MATRIX":
        return [[(i, j) for j in range(n)] for i in range(n)]
    if fmt == "LOWER_DIAG_ROW":
        return [[(i, j) for j in range(i + 1)] for i in range(n)]
    if fmt == "LOWER_ROW":
        return [[(i, j) for j in range(i)] for i in range(1, n)]
    if fmt == "UPPER_ROW":
        return [[(i, j) for j in range(i + 1, n)] for i in range(n - 1)]
    if fmt == "UPPER_DIAG_ROW":
        return [[(i, j) for j in range(i, n)] for i in range(n)]
    raise AssertionError(fmt)


def parse_tsplib(text: str) -> Instance:
    """Read a TSPLIB TSP/ATSP file with explicit edge weights."""
    lines = text.splitlines()
    header: dict[str, str] = {}
    section: list[tuple[int, list[str]]] = []
    pos = 0
    while pos < len(lines):
        raw = lines[pos].strip()
        pos += 1
        if not raw:
            continue
        if raw.startswith("EOF"):
            break
        if raw.startswith("EDGE_WEIGHT_SECTION"):
            rest = raw[len("EDGE_WEIGHT_SECTION"):].replace(":", " ").split()
            if rest:
                section.append((pos, rest))
            while pos < len(lines):
                body = lines[pos].strip()
                if body and _KEYWORD.match(body):
                    break
                if body:
                    section.append((pos + 1, body.split()))
                pos += 1
            continue
        if raw.endswith("_SECTION"):
            # coordinates for display etc.; skip its numeric body
            while pos < len(lines) and not _KEYWORD.match(lines[pos].strip() or "0"):
                pos += 1
            continue
        if ":" not in raw:
            raise ParseError(f"expected 'KEY: VALUE', got {raw!r}", pos)
        key, value = raw.split(":", 1)
        header[key.strip().upper()] = value.strip()

    for key in ("DIMENSION", "EDGE_WEIGHT_TYPE"):
        if key not in header:
            raise ParseError(f"missing {key} header")
    try:
        n = int(header["DIMENSION"])
    except ValueError:
        raise ParseError(f"bad DIMENSION {header['DIMENSION']!r}") from None
    if n < 2:
        raise ParseError(f"DIMENSION must be at least 2, got {n}")
    if header["EDGE_WEIGHT_TYPE"].upper() != "EXPLICIT":
        raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {header['EDGE_WEIGHT_TYPE']}")
    fmt = header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
    if fmt not in _WEIGHT_FORMATS:
        raise ParseError(f"unsupported EDGE_WEIGHT_FORMAT {fmt}")
    if not section:
        raise ParseError("missing EDGE_WEIGHT_SECTION")

    rows = _row_cells(fmt, n)
    values = _read_weights(section, rows)
    cost = np.zeros((n, n), dtype=np.int64)
    for (i, j), value in zip((cell for row in rows for cell in row), values):
        cost[i, j] = value
        if fmt != "FULL_MATRIX":
            cost[j, i] = value
    return Instance(n=n, cost=cost, kind=Kind.TSP, name=header.get("NAME", ""))


def _read_weights(section: list[tuple[int, list[str]]], rows: list[list]) -> list[int]:
    # one matrix row per text line: check each line so the error points at it
    if len(section) == len(rows):
        for (lineno, tokens), row in zip(section, rows):
            if len(tokens) != len(row):
                raise ParseError(
                    f"matrix row {row[0][0] + 1} has {len(tokens)} entries, expected {len(row)}",
                    lineno,
                )
    stream = [(lineno, tok) for lineno, tokens in section for tok in tokens]
    expected = sum(len(r) for r in rows)
    if len(stream) < expected:
        # find the row in which the numbers ran out
        seen = 0
        for row in rows:
            seen += len(row)
            if seen > len(stream):
                break
        raise ParseError(
            f"edge weights end inside matrix row {row[0][0] + 1} "
            f"({len(stream)} of {expected} entries)",
            stream[-1][0] if stream else None,
        )
    if len(stream) > expected:
        raise ParseError(f"{len(stream) - expected} surplus edge weights", stream[expected][0])
    return [_to_int(tok, lineno) for lineno, tok in stream]


def _to_int(token: str, lineno: int) -> int:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", lineno) from None
    if value != int(value):
        raise ParseError(f"non-integral weight {token}", lineno)
    return int(value)


def format_tsplib(inst: Instance) -> str:
    """Canonical FULL_MATRIX rendering of a TSP instance."""
    if inst.kind is not Kind.TSP:
        raise ValueError("only TSP instances have a TSPLIB rendering")
    cost = np.array(inst.cost)
    np.fill_diagonal(cost, 0)
    out = [
        f"NAME: {inst.name}",
        f"TYPE: {'TSP' if inst.symmetric else 'ATSP'}",
        f"DIMENSION: {inst.n}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    out += [" ".join(str(int(c)) for c in row) for row in cost]
    out.append("EOF")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- Ascheuer


def parse_ascheuer(text: str, name: str = "", depot_copy: bool = True) -> Instance:
    """Read an rbg-style TSPTW file: node count, full matrix, one window per node.

    With ``depot_copy`` the last node is the end-depot copy of node 0. Otherwise
    the file lists a closed route and an end copy of the depot is appended.
    """
    stream = [(k + 1, tok) for k, line in enumerate(text.splitlines()) for tok in line.split()]
    if not stream:
        raise ParseError("empty file")
    n = _to_int(stream[0][1], stream[0][0])
    if n < 2:
        raise ParseError(f"node count must be at least 2, got {n}", stream[0][0])
    need = 1 + n * n + 2 * n
    if len(stream) < 1 + n * n:
        raise ParseError(
            f"cost matrix needs {n * n} entries, found {len(stream) - 1}", stream[-1][0]
        )
    if len(stream) != need:
        have = (len(stream) - 1 - n * n) / 2
        raise ParseError(
            f"expected {n} time windows, found {have:g}", stream[min(len(stream), need) - 1][0]
        )
    values = [_to_int(tok, lineno) for lineno, tok in stream[1:]]
    cost = np.array(values[: n * n], dtype=np.int64).reshape(n, n)
    windows = np.array(values[n * n:], dtype=np.int64).reshape(n, 2)
    for k, (a, b) in enumerate(windows):
        if a > b:
            raise ParseError(f"node {k + 1} window [{a}, {b}] is inverted", stream[1 + n * n + 2 * k][0])
    if not depot_copy:
        cost = np.vstack([np.hstack([cost, cost[:, :1]]), np.append(cost[0], 0)[None, :]])
        windows = np.vstack([windows, windows[:1]])
        n += 1
    return Instance(n=n, cost=cost, windows=windows, kind=Kind.TSPTW, depot=(0, n - 1), name=name)


def format_ascheuer(inst: Instance) -> str:
    if inst.kind is not Kind.TSPTW:
        raise ValueError("only TSPTW instances have an rbg rendering")
    cost = np.array(inst.cost)
    np.fill_diagonal(cost, 0)
    out = [str(inst.n)]
    out += [" ".join(str(int(c)) for c in row) for row in cost]
    out += [f"{int(a)} {int(b)}" for a, b in inst.windows]
    return "\n".join(out) + "\n"


def load_instance(path: str | Path) -> Instance:
    """Read a file, picking the reader from its content."""
    path = Path(path)
    text = path.read_text()
    first = text.lstrip()[:64].upper()
    if path.suffix in (".tsp", ".atsp") or first.startswith(("NAME", "TYPE", "COMMENT", "DIMENSION")):
        inst = parse_tsplib(text)
        if not inst.name:
            inst = Instance(n=inst.n, cost=inst.cost, name=path.stem)
        return inst
    return parse_ascheuer(text, name=path.name.removesuffix(".tw"))
