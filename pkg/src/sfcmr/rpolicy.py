"""Restart controller around the reconstruction engine and the ``solve`` entry point."""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field

from .chaos import ChaosStats, TraceRecorder, analyze
from .graph import Graph
from .hcp_io import Kind, verify_sequence
from .mapping import STRATEGIES, DisconnectedGraphError, MappingOutcome
from .reconstruct import reconstruct
from .state import (
    DeadlineReached,
    ExpandSignal,
    NotFoundSignal,
    SolverConfig,
    SolverState,
    VertexLabeling,
    edge_key,
)

log = logging.getLogger(__name__)


class BudgetExhausted(Exception):
    """Raised inside the controller when a time or expansion budget runs out."""


@dataclass
class PolicyConfig:
    """Controller budgets.  ``None`` sizes a budget from the vertex count."""

    max_rounds: int | None = None
    hcp: bool = True
    seed: int = 0
    round_expansions: int | None = None
    max_expansions: int | None = None
    time_limit: float | None = None
    # rounds spent enforcing a cycle before settling for a path
    hc_rounds: int | None = None
    shuffle_every: int | None = None
    mapping: str = "greedy"
    trace: bool = True
    trace_decimation: int = 1
    chaos: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        for name in ("max_rounds", "round_expansions", "max_expansions", "hc_rounds", "shuffle_every"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class RunReport:
    instance: str
    n: int
    m: int
    outcome: str = "none"  # "HC", "HP" or "none"
    sequence: list[int] | None = None
    rounds: int = 0
    expansions: int = 0
    r_vh: int = 0
    r_err: int = 0
    m_vh: int = 0
    m_err: int = 0
    longest: int = 0
    time_mapping: float = 0.0
    time_reconstruct: float = 0.0
    timed_out: bool = False
    seed: int = 0
    iterations: int = 0
    series: list[float] | None = None
    mapping_series: list[float] | None = None
    round_marks: list[int] = field(default_factory=list)
    chaos: ChaosStats | None = None
    counter_history: list[tuple[int, int]] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.outcome != "none"

    @property
    def mu_x(self) -> float | None:
        """Mean percent similarity to the final solution over the trace."""
        if not self.series:
            return None
        return 100.0 * (1.0 - sum(self.series) / len(self.series))


def shuffle_neighborhoods(state: SolverState, rng: random.Random) -> None:
    for nbrs in state.adj:
        rng.shuffle(nbrs)


def _normalize_le(graph: Graph, le) -> list[tuple[int, int]]:
    """Keep a max-degree-2 acyclic subset of ``le`` (earlier edges win)."""
    deg = [0] * graph.n
    parent = list(range(graph.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for u, v in le:
        if deg[u] >= 2 or deg[v] >= 2:
            continue
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        parent[ru] = rv
        deg[u] += 1
        deg[v] += 1
        out.append(edge_key(u, v))
    return out


def _revive_uncovered(state: SolverState, le: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Attach every vertex missing from ``le`` through one or two free neighbours."""
    deg = [0] * state.n
    for u, v in le:
        deg[u] += 1
        deg[v] += 1
    present = set(le)
    out = list(le)
    for z in range(state.n):
        if deg[z]:
            continue
        for y in state.adj[z]:
            if deg[z] >= 2:
                break
            key = edge_key(z, y)
            if deg[y] < 2 and key not in present:
                present.add(key)
                out.append(key)
                deg[z] += 1
                deg[y] += 1
    return _normalize_le(state.graph, out)


def mode_transition(state: SolverState, freq_max: int, last_lpf: int | None, longest: int, longest_le) -> str:
    """Flag update after a failed seed cycle; returns the branch taken.

    * ``"shrink"``: the longest path got shorter than in the previous cycle.
      The worst vertex is demoted (in restricted mode), restricted mode is
      kept only while a cycle was being enforced, and cycle enforcement ends.
    * ``"relax"``: restricted mode is left and the worst vertex demoted.
    * ``"restart"``: L_e is replaced by the longest path found and
      restricted mode is entered again.
    """
    if last_lpf is not None and last_lpf > longest:
        if state.restricted:
            state.demote(freq_max)
        state.restricted = bool(state.hc)
        state.hc = False
        return "shrink"
    if state.restricted:
        state.demote(freq_max)
        state.restricted = False
        return "relax"
    state.reset(_normalize_le(state.graph, longest_le))
    state.restricted = True
    return "restart"


class _Controller:
    def __init__(self, state: SolverState, config: PolicyConfig, rng: random.Random, deadline: float | None):
        self.state = state
        self.config = config
        self.rng = rng
        self.deadline = deadline
        n = state.n
        self.round_budget = config.round_expansions or 8 * n
        self.shuffle_every = config.shuffle_every or n
        self.best_len = 0
        self.best_le: list[tuple[int, int]] | None = None

    def _check_budget(self, calls: int) -> None:
        st = self.state
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise BudgetExhausted("time limit")
        if self.config.max_expansions is not None and st.expansions >= self.config.max_expansions:
            raise BudgetExhausted("expansion budget")
        if calls >= self.round_budget:
            raise BudgetExhausted("round budget")

    def _expand(self, phi, calls: int):
        st = self.state
        if calls and calls % self.shuffle_every == 0:
            shuffle_neighborhoods(st, self.rng)
        st.deadline = self.deadline
        try:
            return reconstruct(st, phi)
        except DeadlineReached:
            raise BudgetExhausted("time limit") from None
        finally:
            if st.longest_len > self.best_len:
                self.best_len = st.longest_len
                self.best_le = list(st.longest_le)
            st.counter_history.append((st.r_vh, st.r_err))

    def _z_seed(self, tried) -> tuple[int, int] | None:
        st = self.state
        order = list(st.A) + [v for v in range(st.n) if v not in st.A]
        for v in order:
            for u in st.adj[v]:
                key = edge_key(v, u)
                if key not in tried:
                    return key
        return None

    def run_round(self, le: list[tuple[int, int]], round_no: int):
        """One controller round; returns the solved edge list or ``None``."""
        st = self.state
        st.round = round_no + 1
        st.hc = st.hcp
        shuffle_neighborhoods(st, self.rng)
        base = list(le)
        st.reset(base)
        tried: set[tuple[int, int]] = set()
        last_lpf: int | None = None
        step2 = False
        calls = 0
        st.longest_len, st.longest_le = 0, None
        lab = st.labeling
        while True:
            self._check_budget(calls)
            try:
                try:
                    untried = [e for e in st.base_le if e not in tried]
                    if not untried:
                        raise NotFoundSignal()
                    phi = self.rng.choice(untried)
                    tried.add(phi)
                    calls += 1
                    return self._expand(phi, calls)
                except ExpandSignal:
                    self._check_budget(calls)
                    phi = self._z_seed(tried)
                    lab.err[:] = [0] * st.n
                    if phi is None:
                        raise NotFoundSignal() from None
                    tried.add(phi)
                    calls += 1
                    return self._expand(phi, calls)
            except ExpandSignal:
                continue
            except NotFoundSignal:
                pass
            # --- every seed of this cycle failed
            st.reset(_revive_uncovered(st, st.base_le))
            err_t = lab.err_total
            freq_max = max(range(st.n), key=lambda v: (err_t[v], -v))
            lab.err_total[:] = [0] * st.n
            tried.clear()
            st.A.clear()
            st.C.clear()
            if st.bottom(freq_max) and st.dstar[freq_max] == 2:
                for key in st.le.incident_ordered(freq_max):
                    st.reset([e for e in st.base_le if e != key])
                    break
            if st.longest_le is None:
                return None
            cycle_len = st.longest_len
            if step2 and not st.any_bottom():
                mode_transition(st, freq_max, last_lpf, cycle_len, st.longest_le)
            if st.any_bottom():
                return None
            last_lpf = cycle_len
            step2 = True
            st.longest_len, st.longest_le = 0, None


def r_policy(state: SolverState, le, config: PolicyConfig, round_no: int = 0, rng=None, deadline=None):
    """Run one controller round on ``state`` starting from edge list ``le``."""
    rng = rng or random.Random(config.seed)
    ctl = _Controller(state, config, rng, deadline)
    try:
        return ctl.run_round(list(le), round_no)
    except BudgetExhausted:
        return None


def solve(graph: Graph, config: PolicyConfig | None = None) -> RunReport:
    """Mapping followed by controller rounds until solved or a stop condition holds."""
    config = config or PolicyConfig()
    n = graph.n
    report = RunReport(graph.name, n, graph.m, seed=config.seed)
    t0 = time.perf_counter()
    deadline = None if config.time_limit is None else t0 + config.time_limit
    if n == 1:
        report.outcome, report.sequence = Kind.HP.value, [0]
        return report
    map_rec = TraceRecorder() if config.trace else None
    try:
        mapping: MappingOutcome = STRATEGIES[config.mapping](graph, seed=config.seed, recorder=map_rec)
    except DisconnectedGraphError:
        report.time_mapping = time.perf_counter() - t0
        return report
    report.m_vh, report.m_err = mapping.m_vh_count, mapping.m_err
    t1 = time.perf_counter()
    report.time_mapping = t1 - t0

    state = SolverState(graph, mapping.le, config.solver, hcp=config.hcp, seed=config.seed)
    rec = None
    if config.trace:
        rec = TraceRecorder(config.trace_decimation)
        rec.sample_edges(state.le.ordered())
        state.iterations += 1
        state.on_le_change = rec.on_le_change
        state.on_commit = rec.sample
    rng = random.Random(config.seed)
    max_rounds = config.max_rounds or n
    hc_rounds = min(config.hc_rounds or max(1, max_rounds // 2), max_rounds)
    # a cycle is tried first when asked for; a path phase with fresh priorities follows
    phases = [(True, hc_rounds), (False, max_rounds - hc_rounds)] if config.hcp else [(False, max_rounds)]
    ctl = _Controller(state, config, rng, deadline)
    result = None
    stopped = False
    for hcp, rounds in phases:
        if result is not None or stopped or rounds <= 0:
            continue
        state.hcp = hcp
        if not hcp and config.hcp:
            state.labeling = VertexLabeling.fresh(n)
            state.restricted = True
        le = list(mapping.le)
        for _ in range(rounds):
            if rec is not None:
                rec.mark_round()
            report.rounds += 1
            try:
                result = ctl.run_round(le, report.rounds - 1)
            except BudgetExhausted as exc:
                log.debug("round %d stopped: %s", report.rounds, exc)
                if str(exc) != "round budget":
                    report.timed_out = str(exc) == "time limit"
                    stopped = True
                    break
            if result is not None:
                break
            if ctl.best_le is None or state.any_bottom():
                break
            # later rounds start from the longest path found so far
            le = _normalize_le(graph, ctl.best_le)
    report.time_reconstruct = time.perf_counter() - t1
    report.expansions = state.expansions
    report.r_vh, report.r_err = state.r_vh, state.r_err
    report.longest = ctl.best_len
    report.iterations = state.iterations
    report.counter_history = state.counter_history

    if result is not None and state.solution is not None:
        kind, seq = state.solution
        # never trust internal state: re-verify against the graph
        if verify_sequence(graph, seq, Kind.HC):
            report.outcome = Kind.HC.value
        elif verify_sequence(graph, seq, kind):
            report.outcome = kind.value
        if report.outcome != "none":
            report.sequence = list(seq)
    if rec is not None:
        rec.flush()
        if report.sequence is not None:
            final = [edge_key(a, b) for a, b in zip(report.sequence, report.sequence[1:])]
            if report.outcome == Kind.HC.value:
                final.append(edge_key(report.sequence[-1], report.sequence[0]))
            report.series = rec.finalize(final).tolist()
            report.round_marks = list(rec.round_marks)
            if map_rec is not None and len(map_rec):
                report.mapping_series = map_rec.finalize(final).tolist()
    if config.chaos and report.series:
        report.chaos = analyze(report.series, seed=config.seed)
    return report
