"""Initial candidate edge list: a vertex-disjoint path cover of the graph.

The default strategy grows paths greedily (fewest free neighbours first),
applies endpoint rotations when a path gets stuck and starts new paths from
the vertices that failed most often.  Any strategy only has to return a
max-degree-2, acyclic subset of E; reconstruction repairs the rest.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from .graph import Graph, articulation_points, is_connected
from .state import edge_key


class DisconnectedGraphError(ValueError):
    """The graph is disconnected, so no Hamiltonian sequence exists."""


@dataclass
class MappingOutcome:
    le: list[tuple[int, int]]
    m_vh_count: int = 0
    m_err: int = 0
    paths: list[list[int]] = field(default_factory=list)


class MappingStrategy(Protocol):
    def __call__(self, graph: Graph, seed: int, recorder=None) -> MappingOutcome: ...


def cost_K(values: Sequence[float]) -> float:
    """Normalised spread of error values, in [0, 1].

    ``sum(e - min) / ((max - min) * (len - 1))``; 0 when all values coincide.
    """
    if len(values) == 0:
        raise ValueError("cost_K needs at least one value")
    lo, hi = min(values), max(values)
    if hi == lo:
        return 0.0
    return sum(v - lo for v in values) / ((hi - lo) * (len(values) - 1))


def _cover_edges(paths):
    return [edge_key(a, b) for p in paths for a, b in zip(p, p[1:])]


class _Cover:
    def __init__(self, graph: Graph, rng: random.Random, err: list[int], recorder):
        self.g = graph
        self.rng = rng
        self.err = err
        self.covered = [False] * graph.n
        self.free_deg = [graph.degree(v) for v in range(graph.n)]
        self.recorder = recorder
        self.m_err = 0

    def _take(self, v):
        self.covered[v] = True
        for u in self.g.adjacency[v]:
            self.free_deg[u] -= 1

    def _free_nbrs(self, v):
        return [u for u in self.g.adjacency[v] if not self.covered[u]]

    def _pick(self, v):
        opts = self._free_nbrs(v)
        if not opts:
            return None
        best = min(self.free_deg[u] for u in opts)
        ties = [u for u in opts if self.free_deg[u] == best]
        return ties[0] if len(ties) == 1 else self.rng.choice(ties)

    def _extend(self, path):
        while True:
            u = self._pick(path[-1])
            if u is None:
                return
            self._take(u)
            path.append(u)
            if self.recorder is not None:
                self.recorder.sample_edges(_cover_edges(self.paths + [path]))

    def _rotate(self, path, tries):
        """Posa rotation: reverse the tail so a new endpoint with free neighbours appears."""
        pos = {v: i for i, v in enumerate(path)}
        for _ in range(tries):
            end = path[-1]
            pivots = [pos[w] for w in self.g.adjacency[end] if w in pos and pos[w] < len(path) - 2]
            pivots = [i for i in pivots if self._free_nbrs(path[i + 1])]
            if not pivots:
                return False
            i = self.rng.choice(pivots)
            path[i + 1:] = reversed(path[i + 1:])
            for j in range(i + 1, len(path)):
                pos[path[j]] = j
            return True
        return False

    def build(self, order: list[int], rotations: int) -> list[list[int]]:
        self.paths: list[list[int]] = []
        for start in order:
            if self.covered[start]:
                continue
            path = [start]
            self._take(start)
            for _ in range(2):
                self._extend(path)
                tries = rotations
                while tries > 0 and self._rotate(path, 1):
                    tries -= 1
                    before = len(path)
                    self._extend(path)
                    if len(path) == before:
                        continue
                path.reverse()
            for end in (path[0], path[-1]):
                # a path that stops while free neighbours remained is an error
                if self._free_nbrs(end):
                    self.err[end] += 1
                    self.m_err += 1
            self.paths.append(path)
        return self.paths


def map_initial(
    graph: Graph,
    seed: int = 0,
    recorder=None,
    attempts: int = 8,
    rotations: int | None = None,
) -> MappingOutcome:
    """Default mapping: best of ``attempts`` randomized greedy path covers.

    Later attempts start from the vertices with the largest accumulated error
    and from the leaf blocks of the graph (found with one cut-vertex pass),
    since those are the places where covers tend to break.
    """
    if graph.n == 0:
        return MappingOutcome([])
    if not is_connected(graph):
        raise DisconnectedGraphError(f"graph {graph.name!r} is disconnected")
    rng = random.Random(seed)
    n = graph.n
    rotations = n if rotations is None else rotations
    err = [0] * n
    m_vh = 0
    m_err = 0
    best = None
    pockets: list[int] = []
    for attempt in range(max(1, attempts)):
        if attempt == 0:
            order = sorted(range(n), key=lambda v: (graph.degree(v), v))
        else:
            ranks = list(range(n))
            rng.shuffle(ranks)
            order = sorted(range(n), key=lambda v: (v not in pockets, -err[v], graph.degree(v), ranks[v]))
        cover = _Cover(graph, rng, err, recorder if attempt == 0 else None)
        paths = cover.build(order, rotations)
        m_err += cover.m_err
        if best is None or len(paths) < len(best):
            best = [list(p) for p in paths]
        if len(best) == 1:
            break
        if attempt == 0:
            cut = articulation_points(graph)
            m_vh += 1
            pockets = sorted(v for v in range(n) if graph.degree(v) == 1 or any(u in cut for u in graph.adjacency[v]))
    le = _cover_edges(best)
    if recorder is not None:
        recorder.sample_edges(le)
    return MappingOutcome(le, m_vh, m_err, best)


def check_path_cover(graph: Graph, le: Sequence[tuple[int, int]]) -> bool:
    """True when ``le`` is a set of graph edges forming vertex-disjoint simple paths."""
    deg = [0] * graph.n
    parent = list(range(graph.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    seen = set()
    for u, v in le:
        key = edge_key(u, v)
        if key in seen or not graph.has_edge(u, v):
            return False
        seen.add(key)
        deg[u] += 1
        deg[v] += 1
        if deg[u] > 2 or deg[v] > 2:
            return False
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


STRATEGIES: dict[str, Callable[..., MappingOutcome]] = {
    "greedy": map_initial,
    # one plain greedy cover: a weaker starting point for experiments
    "single": lambda graph, seed=0, recorder=None: map_initial(graph, seed, recorder, attempts=1, rotations=0),
}
