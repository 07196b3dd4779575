"""Instance files, solution/report/trace writers and sequence verification.

Instance files use the TSPLIB-like layout of the FHCP challenge set::

    NAME : graph1
    TYPE : HCP
    DIMENSION : 66
    EDGE_DATA_FORMAT : EDGE_LIST
    EDGE_DATA_SECTION
     1 2
     ...
    -1
    EOF

Vertex ids are 1-based on disk and 0-based in memory.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .graph import Graph


class Kind(str, Enum):
    HP = "HP"
    HC = "HC"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MalformedHeaderError(ParseError):
    pass


class EndpointRangeError(ParseError):
    pass


class EmptyEdgeSectionError(ParseError):
    pass


class MalformedEdgeError(ParseError):
    pass


class SearchBudgetExceeded(RuntimeError):
    """The exact search ran out of budget: existence is unknown."""


def parse_instance(text: str, name: str | None = None) -> Graph:
    header: dict[str, str] = {}
    edges: list[tuple[int, int]] = []
    dimension = None
    in_edges = False
    section_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not in_edges:
            if line.upper() == "EOF":
                break
            if line.upper().startswith("EDGE_DATA_SECTION"):
                if dimension is None:
                    raise MalformedHeaderError("EDGE_DATA_SECTION before DIMENSION", lineno)
                in_edges = True
                section_line = lineno
                continue
            if ":" not in line:
                raise MalformedHeaderError(f"expected 'KEY : value', got {line!r}", lineno)
            key, value = (s.strip() for s in line.split(":", 1))
            key = key.upper()
            header[key] = value
            if key == "DIMENSION":
                try:
                    dimension = int(value)
                except ValueError:
                    raise MalformedHeaderError(f"bad DIMENSION {value!r}", lineno) from None
                if dimension < 1:
                    raise MalformedHeaderError("DIMENSION must be >= 1", lineno)
            continue
        if line == "-1" or line.upper() == "EOF":
            break
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise MalformedEdgeError(f"non-integer edge entry {line!r}", lineno) from None
        if nums and nums[-1] == -1:
            # some writers terminate on the last data line
            nums = nums[:-1]
            if len(nums) % 2:
                raise MalformedEdgeError(f"odd number of endpoints in {line!r}", lineno)
            edges.extend(_pairs(nums, dimension, lineno))
            break
        if len(nums) % 2:
            raise MalformedEdgeError(f"odd number of endpoints in {line!r}", lineno)
        edges.extend(_pairs(nums, dimension, lineno))
    if dimension is None:
        raise MalformedHeaderError("missing DIMENSION")
    if not in_edges:
        raise MalformedHeaderError("missing EDGE_DATA_SECTION")
    if not edges:
        raise EmptyEdgeSectionError("edge section is empty", section_line)
    return Graph.from_edges(dimension, edges, name if name is not None else header.get("NAME", ""))


def _pairs(nums, dimension, lineno):
    out = []
    for a, b in zip(nums[::2], nums[1::2]):
        for x in (a, b):
            if not 1 <= x <= dimension:
                raise EndpointRangeError(f"endpoint {x} outside 1..{dimension}", lineno)
        if a == b:
            raise MalformedEdgeError(f"self-loop on vertex {a}", lineno)
        out.append((a - 1, b - 1))
    return out


def read_instance(path: str | os.PathLike) -> Graph:
    path = Path(path)
    text = path.read_text()
    g = parse_instance(text)
    if not g.name:
        g = Graph(g.n, g.adjacency, path.stem)
    return g


def format_instance(graph: Graph) -> str:
    lines = [
        f"NAME : {graph.name}",
        "TYPE : HCP",
        f"DIMENSION : {graph.n}",
        "EDGE_DATA_FORMAT : EDGE_LIST",
        "EDGE_DATA_SECTION",
    ]
    lines += [f" {u + 1} {v + 1}" for u, v in graph.edges()]
    lines += ["-1", "EOF", ""]
    return "\n".join(lines)


def verify_sequence(graph: Graph, sequence: Sequence[int], kind: Kind | str) -> bool:
    kind = Kind(kind)
    n = graph.n
    if len(sequence) != n or set(sequence) != set(range(n)):
        return False
    for a, b in zip(sequence, sequence[1:]):
        if not graph.has_edge(a, b):
            return False
    if kind is Kind.HC:
        # a closed walk on fewer than 3 vertices would reuse an edge
        return n >= 3 and graph.has_edge(sequence[-1], sequence[0])
    return True


def brute_force_hamiltonian(graph: Graph, kind: Kind | str, budget: int = 10_000_000) -> list[int] | None:
    """Exact backtracking search.

    Returns a verified sequence, or ``None`` when none exists.  Raises
    :class:`SearchBudgetExceeded` when more than ``budget`` nodes were
    expanded before the question was settled.
    """
    kind = Kind(kind)
    n = graph.n
    if n == 0:
        return None
    if n == 1:
        return [0] if kind is Kind.HP else None
    adj = graph.adjacency
    if kind is Kind.HC and n < 3:
        return None
    starts = [0] if kind is Kind.HC else range(n)
    path: list[int] = []
    on_path = [False] * n
    nodes = 0

    def extend(v):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded(f"brute force exceeded {budget} nodes")
        if len(path) == n:
            return kind is Kind.HP or graph.has_edge(path[-1], path[0])
        for u in adj[v]:
            if not on_path[u]:
                on_path[u] = True
                path.append(u)
                if extend(u):
                    return True
                path.pop()
                on_path[u] = False
        return False

    for s in starts:
        path[:] = [s]
        on_path = [False] * n
        on_path[s] = True
        if extend(s):
            assert verify_sequence(graph, path, kind)
            return list(path)
    return None


@dataclass
class SolutionRecord:
    kind: Kind
    sequence: list[int]
    instance: str = ""
    seed: int | None = None
    wall_time: float = 0.0


def format_solution(sequence: Sequence[int]) -> str:
    return " ".join(str(v + 1) for v in sequence) + "\n"


def parse_solution(text: str) -> list[int]:
    return [int(tok) - 1 for tok in text.split()]


def write_solution(path: str | os.PathLike, record: SolutionRecord) -> Path:
    path = Path(path)
    try:
        path.write_text(format_solution(record.sequence))
    except OSError as exc:
        raise OSError(f"cannot write solution file {path}: {exc}") from exc
    return path


REPORT_COLUMNS = [
    "instance",
    "V",
    "E",
    "M_vH",
    "R_vH",
    "mu_x",
    "M_eps",
    "R_eps",
    "log_M_V",
    "log_R_V",
    "outcome",
    "log_V_M_eps",
    "log_V_R_eps",
    "lyapunov",
    "zero_one",
    "chaos_status",
    "rounds",
    "seed",
    "time_mapping",
    "time_reconstruct",
    "solution_file",
]

# columns excluded when comparing reports across runs
TIMING_COLUMNS = ("time_mapping", "time_reconstruct")


def log_exponent(counter: float | None, n_vertices: int) -> float | None:
    """Exponent ``c`` with ``counter == n_vertices ** c``; ``None`` for empty counters."""
    if not counter or counter <= 0 or n_vertices < 2:
        return None
    return math.log(counter) / math.log(n_vertices)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_report(path: str | os.PathLike, rows: Iterable[dict]) -> Path:
    """Write report rows (dicts keyed by :data:`REPORT_COLUMNS`) as CSV."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_COLUMNS)
            for row in rows:
                writer.writerow([_cell(row.get(col)) for col in REPORT_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc
    return path


def read_report(path: str | os.PathLike) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_trace(path: str | os.PathLike, series: Sequence[float]) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x"])
            for t, x in enumerate(series):
                writer.writerow([t, repr(float(x))])
    except OSError as exc:
        raise OSError(f"cannot write trace {path}: {exc}") from exc
    return path


def read_trace(path: str | os.PathLike) -> list[float]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "x"]:
            raise ParseError(f"trace file {path} lacks the 't,x' header")
        return [float(x) for _, x in reader]
