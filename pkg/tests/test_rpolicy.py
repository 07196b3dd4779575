import random

import pytest

from sfcmr.graph import Graph
from sfcmr.hcp_io import Kind, verify_sequence
from sfcmr.rpolicy import (
    PolicyConfig,
    mode_transition,
    r_policy,
    shuffle_neighborhoods,
    solve,
)
from sfcmr.state import SolverState

from conftest import cubic_hamiltonian, cycle, path, petersen, random_connected

TRIANGLE = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)], name="tri")
STAR3 = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)], name="star")


class TestPolicyConfig:
    @pytest.mark.parametrize("field", ["max_rounds", "round_expansions", "max_expansions", "hc_rounds"])
    def test_counts_must_be_positive(self, field):
        with pytest.raises(ValueError):
            PolicyConfig(**{field: 0})

    def test_time_limit_positive(self):
        with pytest.raises(ValueError):
            PolicyConfig(time_limit=0)


class TestShuffle:
    def test_same_seed_same_order(self):
        a, b = SolverState(petersen()), SolverState(petersen())
        shuffle_neighborhoods(a, random.Random(3))
        shuffle_neighborhoods(b, random.Random(3))
        assert a.adj == b.adj

    def test_edge_set_kept_and_leaves_untouched(self):
        g = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (3, 4)])
        s = SolverState(g)
        shuffle_neighborhoods(s, random.Random(1))
        assert s.adj[1] == [0] and s.adj[4] == [3]
        assert [sorted(a) for a in s.adj] == [sorted(a) for a in g.adjacency]


class TestModeTransition:
    def _state(self):
        s = SolverState(petersen(), [(0, 1), (1, 2)], hcp=True)
        s.hc = True
        return s

    def test_shrink_in_cycle_mode(self):
        s = self._state()
        assert mode_transition(s, 4, last_lpf=9, longest=7, longest_le=[(0, 1)]) == "shrink"
        assert s.demoted(4)
        assert s.restricted is True
        assert s.hc is False

    def test_shrink_in_path_mode(self):
        s = self._state()
        s.hc = False
        s.restricted = False
        mode_transition(s, 4, last_lpf=9, longest=7, longest_le=[(0, 1)])
        assert not s.demoted(4)
        assert s.restricted is False

    def test_relax(self):
        s = self._state()
        assert mode_transition(s, 2, last_lpf=7, longest=7, longest_le=[(0, 1)]) == "relax"
        assert s.demoted(2)
        assert s.restricted is False
        assert s.hc is True

    def test_restart_from_longest(self):
        s = self._state()
        s.restricted = False
        assert mode_transition(s, 2, last_lpf=5, longest=7, longest_le=[(3, 4), (4, 9)]) == "restart"
        assert s.base_le == [(3, 4), (4, 9)]
        assert s.restricted is True
        assert not s.demoted(2)


class TestRPolicy:
    def test_triangle_first_seed(self):
        s = SolverState(TRIANGLE, TRIANGLE.edges(), hcp=True)
        le = r_policy(s, TRIANGLE.edges(), PolicyConfig())
        assert le is not None
        assert s.expansions == 1
        assert verify_sequence(TRIANGLE, s.solution[1], Kind.HC)

    def test_no_incumbent_returns(self):
        # an isolated vertex: every seed fails before any path is recorded
        g = Graph.from_edges(3, [(0, 1)])
        s = SolverState(g, [], hcp=False)
        assert r_policy(s, [], PolicyConfig()) is None
        assert s.expansions == 0

    def test_star_gives_up(self):
        s = SolverState(STAR3, [(0, 1), (0, 2)], hcp=False)
        assert r_policy(s, [(0, 1), (0, 2)], PolicyConfig()) is None


class TestSolve:
    def test_path_graph(self):
        r = solve(path(4))
        assert r.outcome == "HP"
        assert verify_sequence(path(4), r.sequence, Kind.HP)

    def test_cycle_graph(self):
        r = solve(cycle(8))
        assert r.outcome == "HC"

    def test_petersen_path_only(self):
        g = petersen()
        r = solve(g, PolicyConfig(seed=0))
        assert r.outcome == "HP"
        assert verify_sequence(g, r.sequence, Kind.HP)

    def test_petersen_path_target(self):
        r = solve(petersen(), PolicyConfig(hcp=False))
        assert r.outcome == "HP"

    def test_star_unsolved(self):
        r = solve(STAR3)
        assert r.outcome == "none"
        assert r.sequence is None

    def test_disconnected_unsolved(self):
        r = solve(Graph.from_edges(4, [(0, 1), (2, 3)]))
        assert r.outcome == "none"
        assert r.rounds == 0

    def test_single_vertex(self):
        r = solve(Graph.from_edges(1, []))
        assert r.outcome == "HP"
        assert r.sequence == [0]

    def test_deterministic(self):
        g = cubic_hamiltonian(40, seed=5)
        a, b = solve(g, PolicyConfig(seed=7)), solve(g, PolicyConfig(seed=7))
        assert a.sequence == b.sequence
        assert (a.r_vh, a.r_err, a.iterations) == (b.r_vh, b.r_err, b.iterations)
        assert a.series == b.series

    def test_counters_never_decrease(self):
        r = solve(petersen())
        hist = r.counter_history
        assert hist
        assert all(x[0] <= y[0] and x[1] <= y[1] for x, y in zip(hist, hist[1:]))

    def test_time_limit(self):
        g = cubic_hamiltonian(400, seed=1)
        r = solve(g, PolicyConfig(time_limit=0.5))
        assert r.time_mapping + r.time_reconstruct < 5.0
        if not r.solved:
            assert r.timed_out

    def test_expansion_budget(self):
        r = solve(STAR3, PolicyConfig(max_expansions=3))
        assert r.outcome == "none"
        assert r.expansions <= 4

    def test_trace_contract(self):
        g = cubic_hamiltonian(30, seed=2)
        r = solve(g, PolicyConfig(seed=1))
        assert r.solved
        assert r.series[-1] == 0.0
        assert all(0.0 <= x <= 1.0 for x in r.series)
        assert len(r.series) == r.iterations
        assert 0.0 <= r.mu_x <= 100.0

    def test_no_trace(self):
        r = solve(cycle(6), PolicyConfig(trace=False))
        assert r.solved and r.series is None

    @pytest.mark.parametrize("gseed", range(10))
    def test_small_random_graphs_verified(self, gseed):
        g = random_connected(random.Random(gseed), 9, 0.3)
        r = solve(g, PolicyConfig(seed=gseed))
        if r.solved:
            assert verify_sequence(g, r.sequence, Kind(r.outcome))
