"""Graph container, cut-vertex labeling and the component decomposition used by
the reconstruction engine.

Vertices are always ``0..n-1``.  Subgraphs are never materialised; callers pass
the set of *active* vertices (and, when needed, a few virtual edges) and the
routines here walk the immutable adjacency restricted to that set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with a stable neighbour order."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency must have one entry per vertex")
        for v, nbrs in enumerate(self.adjacency):
            if len(set(nbrs)) != len(nbrs):
                raise ValueError(f"duplicate edge at vertex {v}")
            for u in nbrs:
                if u == v:
                    raise ValueError(f"self-loop at vertex {v}")
                if not 0 <= u < self.n:
                    raise ValueError(f"neighbour {u} of {v} out of range")
                if v not in self.adjacency[u]:
                    raise ValueError(f"edge ({v}, {u}) is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str = "") -> "Graph":
        """Build a graph from 0-based pairs.  Duplicates are dropped, order kept."""
        adj: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            key = (u, v) if u < v else (v, u)
            if key in seen:
                continue
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        return cls(n, tuple(tuple(a) for a in adj), name)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        a, b = (u, v) if len(self.adjacency[u]) <= len(self.adjacency[v]) else (v, u)
        return b in self.adjacency[a]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, in first-seen order."""
        out = []
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if v < u:
                    out.append((v, u))
        return out

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


def _neighbors_fn(graph: Graph, adjacency, extra_edges):
    adj = graph.adjacency if adjacency is None else adjacency
    if not extra_edges:
        return adj.__getitem__
    extra: dict[int, list[int]] = {}
    for u, v in extra_edges:
        extra.setdefault(u, []).append(v)
        extra.setdefault(v, []).append(u)

    def nbrs(v):
        more = extra.get(v)
        if more is None:
            return adj[v]
        return list(adj[v]) + more

    return nbrs


def articulation_points(
    graph: Graph,
    active: Iterable[int] | None = None,
    extra_edges: Sequence[tuple[int, int]] = (),
    adjacency=None,
) -> set[int]:
    """Cut vertices of the subgraph induced by ``active``.

    Iterative Hopcroft-Tarjan lowpoint DFS, so deep graphs do not hit the
    recursion limit.  ``extra_edges`` are virtual edges between active
    vertices that exist only for this computation.  Disconnected inputs are
    handled per component.
    """
    if active is None:
        active_set = set(range(graph.n))
    else:
        active_set = active if isinstance(active, (set, frozenset)) else set(active)
    if not active_set:
        return set()
    nbrs = _neighbors_fn(graph, adjacency, extra_edges)

    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    cut: set[int] = set()
    counter = 0
    for root in sorted(active_set):
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        # frames: (vertex, parent, neighbour iterator)
        stack = [(root, -1, iter(nbrs(root)))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w not in active_set:
                    continue
                if w not in disc:
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, v, iter(nbrs(w))))
                    advanced = True
                    break
                if w != parent:
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            if advanced:
                continue
            stack.pop()
            if parent == -1:
                continue
            if low[v] < low[parent]:
                low[parent] = low[v]
            if parent == root:
                root_children += 1
            elif low[v] >= disc[parent]:
                cut.add(parent)
        if root_children > 1:
            cut.add(root)
    return cut


@dataclass
class ComponentInfo:
    """One connected component of the active graph with the cut vertices removed.

    ``hn_value``/``hn_boundary`` follow the Z-set rule: only members with
    exactly one cut-vertex neighbour contribute to the boundary.
    ``attachments`` is every cut vertex adjacent to any member.
    """

    members: frozenset[int]
    hn_value: int
    hn_boundary: frozenset[int]
    attachments: frozenset[int] = field(default_factory=frozenset)


def components_minus_vh(
    graph: Graph,
    active: Iterable[int],
    vh_set: Iterable[int],
    extra_edges: Sequence[tuple[int, int]] = (),
    adjacency=None,
) -> list[ComponentInfo]:
    active_set = active if isinstance(active, (set, frozenset)) else set(active)
    vh = vh_set if isinstance(vh_set, (set, frozenset)) else set(vh_set)
    nbrs = _neighbors_fn(graph, adjacency, extra_edges)
    seen: set[int] = set()
    out = []
    for start in sorted(active_set):
        if start in vh or start in seen:
            continue
        members = [start]
        seen.add(start)
        i = 0
        while i < len(members):
            w = members[i]
            i += 1
            for x in nbrs(w):
                if x in active_set and x not in vh and x not in seen:
                    seen.add(x)
                    members.append(x)
        boundary: set[int] = set()
        attach: set[int] = set()
        for w in members:
            cut_nbrs = {x for x in nbrs(w) if x in vh and x in active_set}
            attach |= cut_nbrs
            if len(cut_nbrs) == 1:
                boundary |= cut_nbrs
        out.append(
            ComponentInfo(frozenset(members), len(boundary), frozenset(boundary), frozenset(attach))
        )
    return out


def is_connected(graph: Graph, active: Iterable[int] | None = None) -> bool:
    vs = set(range(graph.n)) if active is None else set(active)
    if not vs:
        return True
    start = min(vs)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in graph.adjacency[v]:
            if u in vs and u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(vs)
