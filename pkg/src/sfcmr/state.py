"""Mutable solver state: active-vertex mask, candidate edge list, scene degrees,
the two expandable paths and an undo log.

Every structural mutation goes through a small set of primitives that append an
inverse record to ``undo_log``; :meth:`SolverState.undo_to` replays them in
reverse.  Error counters, priorities and the attachment sets ``A``/``C`` are
*persistent*: they survive undo on purpose.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Iterable

from .graph import Graph


class Signal(Exception):
    """Base for the recoverable control signals of the reconstruction loop."""


class ExpandSignal(Signal):
    """Abandon the current expansion call; the controller picks a new seed edge."""


class ErrorSignal(Signal):
    """Local inconsistency; handled by backtracking inside the expansion call."""


class NotFoundSignal(Signal):
    """No untried seed edge is left for the current controller cycle."""


class DeadlineReached(Exception):
    """The wall-clock deadline passed in the middle of an expansion call."""


class EdgeStatus(IntEnum):
    NONSYNC = 0
    SYNC = 1


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class EdgeList:
    """Ordered set of candidate edges with a per-edge status.

    Order is given by an insertion sequence number that is restored on undo,
    so iteration order after a rollback matches the original.
    Synchronized edges may only be removed with ``via_undo=True``.
    """

    def __init__(self, n: int):
        self.entries: dict[tuple[int, int], list[int]] = {}  # key -> [seq, status]
        self.incident: list[dict[tuple[int, int], None]] = [dict() for _ in range(n)]
        self._next_seq = 0

    def __contains__(self, key) -> bool:
        return edge_key(*key) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def status(self, u: int, v: int) -> EdgeStatus | None:
        e = self.entries.get(edge_key(u, v))
        return None if e is None else EdgeStatus(e[1])

    def add(self, u: int, v: int, status=EdgeStatus.NONSYNC, seq: int | None = None) -> tuple[int, int]:
        key = edge_key(u, v)
        if key in self.entries:
            raise AssertionError(f"edge {key} already in L_e")
        if seq is None:
            seq = self._next_seq
            self._next_seq += 1
        self.entries[key] = [seq, int(status)]
        self.incident[key[0]][key] = None
        self.incident[key[1]][key] = None
        return key

    def remove(self, u: int, v: int, via_undo: bool = False) -> tuple[int, int]:
        key = edge_key(u, v)
        seq, status = self.entries[key]
        if status == EdgeStatus.SYNC and not via_undo:
            raise AssertionError(f"synchronized edge {key} removed outside undo")
        del self.entries[key]
        del self.incident[key[0]][key]
        del self.incident[key[1]][key]
        return key

    def set_status(self, u: int, v: int, status: EdgeStatus) -> None:
        self.entries[edge_key(u, v)][1] = int(status)

    def seq(self, key) -> int:
        return self.entries[key][0]

    def ordered(self) -> list[tuple[int, int]]:
        return sorted(self.entries, key=lambda k: self.entries[k][0])

    def incident_ordered(self, v: int) -> list[tuple[int, int]]:
        inc = self.incident[v]
        if len(inc) < 2:
            return list(inc)
        return sorted(inc, key=lambda k: self.entries[k][0])

    def sync_edges(self) -> list[tuple[int, int]]:
        return [k for k in self.ordered() if self.entries[k][1] == EdgeStatus.SYNC]

    def snapshot(self) -> dict:
        return {k: tuple(v) for k, v in self.entries.items()}


@dataclass
class SolverConfig:
    """Knobs of the reconstruction engine (controller budgets live in PolicyConfig)."""

    ladder_depth: int = 8
    reorder_ascending: bool = True
    backjump: bool = True
    # a vertex may be committed this many times |V| per expansion call
    u_last_factor: float = 1.0


@dataclass
class VertexLabeling:
    rung: list[int]
    err: list[int]
    err_total: list[int]

    @classmethod
    def fresh(cls, n: int) -> "VertexLabeling":
        return cls([0] * n, [0] * n, [0] * n)

    def priority(self, v: int) -> Fraction:
        return Fraction(1, 2 ** self.rung[v])


class SolverState:
    """Working state of one solve.  Confined to a single thread."""

    def __init__(
        self,
        graph: Graph,
        le: Iterable[tuple[int, int]] = (),
        config: SolverConfig | None = None,
        hcp: bool = True,
        seed: int = 0,
    ):
        self.graph = graph
        self.n = graph.n
        self.config = config or SolverConfig()
        self.adj: list[list[int]] = [list(a) for a in graph.adjacency]
        self.rng = random.Random(seed)
        self.labeling = VertexLabeling.fresh(self.n)
        self.hcp = hcp
        self.hc = hcp
        self.restricted = True
        self.A: dict[int, None] = {}
        self.C: dict[int, None] = {}
        # counters (persistent)
        self.r_vh = 0
        self.r_err = 0
        self.expansions = 0
        self.iterations = 0
        self.longest_len = 0
        self.longest_le: list[tuple[int, int]] | None = None
        self.solution = None
        self.deadline: float | None = None
        self.counter_history: list[tuple[int, int]] = []
        self.on_commit: Callable[[SolverState], None] | None = None
        self.on_le_change: Callable[[str, tuple[int, int]], None] | None = None
        self._zobrist = [self.rng.getrandbits(64) for _ in range(self.n)]
        self._ap_cache: dict = {}
        self.base_le: list[tuple[int, int]] = [edge_key(u, v) for u, v in le]
        self.reset()

    # ------------------------------------------------------------------
    # construction / restore

    def reset(self, le: Iterable[tuple[int, int]] | None = None) -> None:
        """Restore the initial H (all vertices active) and L_e (all non-synchronized)."""
        if le is not None:
            self.base_le = [edge_key(u, v) for u, v in le]
        n = self.n
        old = getattr(self, "le", None)
        if old is not None and self.on_le_change is not None:
            for key in old.ordered():
                self.on_le_change("remove", key)
        self.active = [True] * n
        self.n_active = n
        self.active_hash = 0
        for v in range(n):
            self.active_hash ^= self._zobrist[v]
        self.le = EdgeList(n)
        self.dstar = [0] * n
        for u, v in self.base_le:
            self._raw_add(u, v, EdgeStatus.NONSYNC)
        self.p1: list[int] = []
        self.p2: list[int] = []
        self.on_path = [False] * n
        self.splitable = True
        self.undo_log: list[tuple] = []
        self.u_last_counts: dict[int, int] = {}

    # ------------------------------------------------------------------
    # primitives (logged)

    def _raw_add(self, u, v, status, seq=None):
        key = self.le.add(u, v, status, seq)
        if self.active[key[0]] and self.active[key[1]]:
            self.dstar[key[0]] += 1
            self.dstar[key[1]] += 1
        if self.on_le_change is not None:
            self.on_le_change("add", key)
        return key

    def _raw_remove(self, key, via_undo=False):
        self.le.remove(*key, via_undo=via_undo)
        if self.active[key[0]] and self.active[key[1]]:
            self.dstar[key[0]] -= 1
            self.dstar[key[1]] -= 1
        if self.on_le_change is not None:
            self.on_le_change("remove", key)

    def add_edge(self, u: int, v: int, status=EdgeStatus.NONSYNC) -> tuple[int, int]:
        key = self._raw_add(u, v, status)
        self.undo_log.append(("add", key))
        return key

    def remove_edge(self, key: tuple[int, int]) -> None:
        seq, status = self.le.entries[key]
        self._raw_remove(key)
        self.undo_log.append(("remove", key, seq, status))

    def sync_edge(self, u: int, v: int) -> None:
        key = edge_key(u, v)
        old = self.le.entries[key][1]
        if old != EdgeStatus.SYNC:
            self.le.set_status(u, v, EdgeStatus.SYNC)
            self.undo_log.append(("status", key, old))

    def _set_active(self, v: int, flag: bool) -> None:
        if self.active[v] == flag:
            return
        delta = 1 if flag else -1
        if not flag:
            for key in self.le.incident[v]:
                w = key[0] if key[1] == v else key[1]
                if self.active[w]:
                    self.dstar[w] -= 1
                    self.dstar[v] -= 1
        self.active[v] = flag
        if flag:
            for key in self.le.incident[v]:
                w = key[0] if key[1] == v else key[1]
                if self.active[w]:
                    self.dstar[w] += 1
                    self.dstar[v] += 1
        self.n_active += delta
        self.active_hash ^= self._zobrist[v]

    def deactivate(self, v: int) -> None:
        if self.active[v]:
            self._set_active(v, False)
            self.undo_log.append(("deact", v))

    def push_path(self, which: int, v: int) -> None:
        path = self.p1 if which == 1 else self.p2
        path.append(v)
        self.on_path[v] = True
        self.undo_log.append(("push", which))

    def swap_paths(self) -> None:
        self.p1, self.p2 = self.p2, self.p1
        self.undo_log.append(("swap",))

    def set_splitable(self, flag: bool) -> None:
        if self.splitable != flag:
            self.undo_log.append(("splitable", self.splitable))
            self.splitable = flag

    # ------------------------------------------------------------------
    # checkpoint / undo

    def checkpoint(self) -> int:
        return len(self.undo_log)

    def undo_to(self, mark: int) -> None:
        if mark > len(self.undo_log) or mark < 0:
            raise AssertionError("undo past the start of the log")
        log = self.undo_log
        while len(log) > mark:
            rec = log.pop()
            op = rec[0]
            if op == "add":
                self._raw_remove(rec[1], via_undo=True)
            elif op == "remove":
                _, key, seq, status = rec
                self._raw_add(key[0], key[1], status, seq)
            elif op == "status":
                self.le.set_status(rec[1][0], rec[1][1], EdgeStatus(rec[2]))
            elif op == "deact":
                self._set_active(rec[1], True)
            elif op == "push":
                path = self.p1 if rec[1] == 1 else self.p2
                v = path.pop()
                self.on_path[v] = False
            elif op == "swap":
                self.p1, self.p2 = self.p2, self.p1
            elif op == "splitable":
                self.splitable = rec[1]
            else:  # pragma: no cover
                raise AssertionError(f"unknown undo record {rec!r}")

    def snapshot(self) -> tuple:
        """Everything undo is responsible for, in comparable form."""
        return (
            tuple(self.active),
            tuple(sorted(self.le.snapshot().items())),
            tuple(self.dstar),
            tuple(self.p1),
            tuple(self.p2),
            self.splitable,
        )

    # ------------------------------------------------------------------
    # queries

    @property
    def x1(self) -> int:
        return self.p1[-1] if self.p1 else -1

    @property
    def x2(self) -> int:
        return self.p2[-1] if self.p2 else -1

    def priority(self, v: int) -> Fraction:
        return self.labeling.priority(v)

    def demoted(self, v: int) -> bool:
        return self.labeling.rung[v] > 0

    def bottom(self, v: int) -> bool:
        return self.labeling.rung[v] >= self.config.ladder_depth

    def demote(self, v: int) -> None:
        lab = self.labeling
        lab.rung[v] = min(lab.rung[v] + 1, self.config.ladder_depth)

    def any_bottom(self) -> bool:
        return any(r >= self.config.ladder_depth for r in self.labeling.rung)

    def unvisited(self, v: int) -> bool:
        return self.active[v] and not self.on_path[v]

    def scene_degree(self, v: int) -> int:
        return self.dstar[v]

    def recount_dstar(self) -> list[int]:
        d = [0] * self.n
        for a, b in self.le.entries:
            if self.active[a] and self.active[b]:
                d[a] += 1
                d[b] += 1
        return d

    def sequence(self) -> list[int]:
        """Current path pair joined through the seed edge."""
        return list(reversed(self.p1)) + list(self.p2)

    def path_length(self) -> int:
        return len(self.p1) + len(self.p2)

    def active_set(self) -> set[int]:
        return {v for v in range(self.n) if self.active[v]}

    def cut_vertices(self, vertices: set[int], extra_edges=()) -> set[int]:
        """Articulation points of the induced subgraph, memoised by vertex-set hash."""
        from .graph import articulation_points

        h = 0
        for v in vertices:
            h ^= self._zobrist[v]
        key = (h, len(vertices), tuple(sorted(edge_key(*e) for e in extra_edges)))
        hit = self._ap_cache.get(key)
        if hit is not None:
            return hit
        self.r_vh += 1
        res = frozenset(articulation_points(self.graph, vertices, extra_edges))
        if len(self._ap_cache) > 50_000:
            self._ap_cache.clear()
        self._ap_cache[key] = res
        return res

    def commit_sample(self) -> None:
        self.iterations += 1
        if self.on_commit is not None:
            self.on_commit(self)

    def record_longest(self) -> None:
        a = self.path_length()
        if a > self.longest_len:
            self.longest_len = a
            self.longest_le = self.le.ordered()

    def check_invariants(self) -> None:
        """Raise AssertionError on any broken structural invariant."""
        assert self.dstar == self.recount_dstar(), "scene degree cache out of sync"
        assert not (set(self.p1) & set(self.p2)), "paths share a vertex"
        assert len(set(self.p1)) == len(self.p1) and len(set(self.p2)) == len(self.p2)
        for path in (self.p1, self.p2):
            for a, b in zip(path, path[1:]):
                assert self.le.status(a, b) == EdgeStatus.SYNC, "path edge not synchronized"
        seq = self.sequence()
        want = {edge_key(a, b) for a, b in zip(seq, seq[1:])}
        sync = set(self.le.sync_edges())
        extra = sync - want
        # the closing edge of a finished cycle is the only allowed extra
        assert len(extra) == 0 or (
            len(extra) == 1 and len(seq) == self.n and extra == {edge_key(seq[0], seq[-1])}
        ), f"stray synchronized edges {extra}"
        assert want <= sync or not self.p1, "path pair not backed by synchronized edges"
        deg = [0] * self.n
        for a, b in sync:
            deg[a] += 1
            deg[b] += 1
        assert max(deg, default=0) <= 2, "synchronized edges branch"
        for v in self.p1[:-1] + self.p2[:-1]:
            assert not self.active[v], "interior path vertex still active"
        assert self.n_active == sum(self.active)
