"""Reconstruction engine: grows two paths out of a seed edge, synchronizing
candidate edges one at a time and backtracking through the undo log when the
remaining graph can no longer host a Hamiltonian sequence.

Control flow uses three signals from :mod:`sfcmr.state`:

* ``ErrorSignal`` - the last commit broke feasibility; undo it and try the next
  candidate (possibly jumping back several checkpoints).
* ``ExpandSignal`` - give up on this seed edge; the controller picks another.
* ``NotFoundSignal`` - raised by the controller only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .graph import components_minus_vh
from .hcp_io import Kind, verify_sequence
from .state import DeadlineReached, EdgeStatus, ErrorSignal, ExpandSignal, SolverState, edge_key

SWAP = -2  # candidate meaning "stop this end, continue from the other path"


def rec_node(state: SolverState, v: int, pass_: bool = True) -> list[int]:
    """Ordered next-vertex candidates for an expansion from ``v``.

    With ``pass_`` the candidates are L_e partners of ``v``; without it they are
    neighbours of ``v`` that sit on some other L_e edge.  Either way the list is
    ``S1 + S2 + S0``: scene degree 1, scene degree 2, then uncovered neighbours
    (scene degree 0).  Demoted vertices are left out.
    """
    if v < 0:
        raise ExpandSignal("rec_node on an absent vertex")
    le = state.le
    active = state.active
    dstar = state.dstar
    s1: list[int] = []
    s2: list[int] = []
    in_le: set[int] = set()
    if pass_:
        for key in le.incident_ordered(v):
            u = key[0] if key[1] == v else key[1]
            if not state.unvisited(u) or state.demoted(u):
                continue
            in_le.add(u)
            if dstar[u] == 1:
                s1.append(u)
            elif dstar[u] == 2:
                s2.append(u)
    else:
        for u in state.adj[v]:
            if not state.unvisited(u) or state.demoted(u):
                continue
            for key in le.incident[u]:
                if v in key:
                    continue
                w = key[0] if key[1] == u else key[1]
                if active[w]:
                    in_le.add(u)
                    if dstar[u] == 1:
                        s1.append(u)
                    elif dstar[u] == 2:
                        s2.append(u)
                    break
    s0 = [
        u
        for u in state.adj[v]
        if dstar[u] == 0 and u not in in_le and state.unvisited(u) and not state.demoted(u)
    ]
    return s1 + s2 + s0


def reorder(state: SolverState, v: int) -> list[int]:
    """Unvisited neighbours of ``v`` by error counter, non-demoted block first."""
    err = state.labeling.err
    cands = [u for u in state.adj[v] if state.unvisited(u)]
    cands.sort(key=lambda u: err[u], reverse=not state.config.reorder_ascending)
    return [u for u in cands if not state.demoted(u)] + [u for u in cands if state.demoted(u)]


def candidates(state: SolverState, v: int) -> list[int]:
    out = rec_node(state, v, True)
    seen = set(out)
    for u in rec_node(state, v, False) + reorder(state, v):
        if u not in seen:
            seen.add(u)
            out.append(u)
    if state.splitable and not state.hc:
        out.append(SWAP)
    return out


def _first_scene_nonsync(state: SolverState, w: int):
    for key in state.le.incident_ordered(w):
        if state.le.entries[key][1] == EdgeStatus.SYNC:
            continue
        other = key[0] if key[1] == w else key[1]
        if state.active[other]:
            return key
    return None


def _make_room(state: SolverState, w: int) -> None:
    if state.dstar[w] > 1:
        key = _first_scene_nonsync(state, w)
        if key is not None:
            state.remove_edge(key)


def select_first(state: SolverState, vN: list[int]) -> int | None:
    """Commit the first candidate: move the current end ``x1`` to it."""
    if not vN:
        return None
    v = state.x1
    u = vN[0]
    if (v, u) not in state.le:
        _make_room(state, u)
        _make_room(state, v)
        state.add_edge(v, u, EdgeStatus.SYNC)
    else:
        state.sync_edge(v, u)
    state.deactivate(v)
    state.push_path(1, u)
    state.u_last_counts[u] = state.u_last_counts.get(u, 0) + 1
    state.record_longest()
    state.commit_sample()
    return u


def _h_view(state: SolverState):
    """Vertex set, virtual edges and free terminal slots of the remaining problem."""
    x1, x2 = state.x1, state.x2
    if state.hc:
        return state.active_set(), [(x1, x2)], 0, (x1, x2)
    if state.splitable:
        return state.active_set(), [(x1, x2)], 2, (x1, x2)
    h = state.active_set()
    h.discard(x2)
    return h, [], 1, (x1,)


def valid_state(state: SolverState, v: int | None = None) -> bool:
    """Check that the remaining graph can still be finished from the path ends.

    Pockets (components hanging off a single cut vertex and holding no path
    end) must each host a final endpoint of the sequence, so there may be no
    more of them than free terminal slots.  Only the first pocket whose cut
    vertex is demoted is counted.  Violations bump the error counters of the
    pocket boundaries and raise ``ErrorSignal``; a boundary counter above
    ``|V|`` raises ``ExpandSignal`` instead.
    """
    if v is None:
        v = state.x1
    n = state.n
    x1, x2 = state.x1, state.x2
    if not state.p2 and not state.splitable:
        raise ExpandSignal("empty second path and not splitable")
    h, extra, slots, ends = _h_view(state)
    remaining = n - len(state.p1) - len(state.p2)
    if remaining == 0:
        if state.hc and not state.graph.has_edge(x1, x2):
            raise ErrorSignal("cycle cannot be closed")
        return True
    cut = state.cut_vertices(h, extra)
    if state.hc:
        bad = [e for e in (x1, x2) if e in cut]
        if bad:
            for e in bad:
                state.C[e] = None
            raise ErrorSignal("path end is a cut vertex in cycle mode")
    lab = state.labeling
    counted = []
    isolated = []
    demoted_seen = 0
    for comp in components_minus_vh(state.graph, h, cut, extra, state.adj):
        if comp.hn_value > 1 or any(e in comp.members for e in ends):
            continue
        if not comp.attachments:
            isolated.append(comp)
        elif len(comp.attachments) == 1:
            (c,) = comp.attachments
            if state.demoted(c):
                demoted_seen += 1
                if demoted_seen > 1:
                    continue
            counted.append(comp)
    if not isolated and len(counted) <= slots:
        return True
    for comp in counted:
        for c in comp.attachments:
            lab.err[c] += 1
            lab.err_total[c] += 1
            if lab.err_total[c] > n:
                state.demote(c)
                lab.err_total[c] = 0
            if lab.err[c] > n:
                lab.err[c] = 0
                raise ExpandSignal(f"error counter of {c} exceeded |V|")
            state.C[c] = None
        for w in sorted(comp.members):
            state.C[w] = None
    for comp in isolated:
        for w in sorted(comp.members):
            state.C[w] = None
    if not state.restricted:
        state.C = dict.fromkeys(sorted(cut))
    raise ErrorSignal("remaining graph cannot host the sequence")


def path_split(state: SolverState) -> int:
    """Close the current path end and continue from the other path.

    Returns the new expanding end.  Raises ``ExpandSignal`` when splitting is
    not allowed (cycle mode, already split) or when isolated components or
    more than one demoted pocket lie away from both ends.
    """
    if not state.splitable:
        raise ExpandSignal("path already split")
    if state.hc:
        raise ExpandSignal("cannot split while enforcing a cycle")
    v, x2 = state.x1, state.x2
    if not state.p2:
        raise ExpandSignal("no second path to continue from")
    h = state.active_set()
    cut = state.cut_vertices(h)
    near = {v, x2, *state.adj[v], *state.adj[x2]}
    s0 = s1 = 0
    for comp in components_minus_vh(state.graph, h, cut, (), state.adj):
        if comp.members & near or comp.hn_value > 1:
            continue
        if comp.hn_value == 0 and not comp.attachments:
            s1 += 1
        elif comp.hn_value == 1 and any(state.demoted(c) for c in comp.hn_boundary):
            s0 += 1
    if s0 > 1 or s1 > 0:
        raise ExpandSignal("isolated component away from both ends")
    state.swap_paths()
    state.set_splitable(False)
    return state.x1


def path_swap(state: SolverState) -> int | None:
    """Exchange the two paths and take one step from the new end."""
    assert state.splitable, "path_swap requires a splitable state"
    state.swap_paths()
    state.set_splitable(False)
    vN = [u for u in candidates(state, state.x1) if u != SWAP]
    return select_first(state, vN)


def is_complete(state: SolverState) -> bool:
    return len(state.p1) + len(state.p2) == state.n


def _finish(state: SolverState) -> tuple[Kind, list[int]] | None:
    seq = state.sequence()
    if state.hc:
        a, b = state.x1, state.x2
        if not state.graph.has_edge(a, b):
            return None
        if (a, b) in state.le:
            state.sync_edge(a, b)
        else:
            _make_room(state, a)
            _make_room(state, b)
            state.add_edge(a, b, EdgeStatus.SYNC)
        kind = Kind.HC
    else:
        kind = Kind.HP
    if not verify_sequence(state.graph, seq, kind):
        return None
    return kind, seq


@dataclass
class _Frame:
    mark: int
    v: int
    cands: list[int]
    pos: int = 0

    def remaining(self) -> list[int]:
        return self.cands[self.pos:]


def _related(state: SolverState, frame: _Frame) -> bool:
    conflict = state.C
    for u in frame.remaining():
        if u == SWAP:
            continue
        if u in conflict or any(w in conflict for w in state.adj[u]):
            return True
    return False


def seed(state: SolverState, phi: tuple[int, int]) -> None:
    """Restore the initial state and plant the seed edge as two one-vertex paths."""
    state.reset()
    x1, x2 = phi
    if not state.graph.has_edge(x1, x2):
        raise ValueError(f"seed {phi} is not an edge of the graph")
    if (x1, x2) not in state.le:
        _make_room(state, x1)
        _make_room(state, x2)
        state.add_edge(x1, x2, EdgeStatus.SYNC)
    else:
        state.sync_edge(x1, x2)
    state.push_path(1, x1)
    state.push_path(2, x2)
    state.u_last_counts = {}
    state.undo_log.clear()


def reconstruct(state: SolverState, phi: tuple[int, int]):
    """One expansion call from seed edge ``phi``.

    Returns the edge list whose synchronized edges form a verified Hamiltonian
    path (or cycle when ``state.hc``); the sequence is left in
    ``state.solution``.  Raises ``ExpandSignal`` when the call gives up.
    """
    state.expansions += 1
    state.solution = None
    seed(state, phi)
    state.record_longest()
    state.commit_sample()
    cfg = state.config
    limit = max(2, int(cfg.u_last_factor * state.n))
    try:
        valid_state(state)
    except ErrorSignal:
        state.r_err += 1
        raise ExpandSignal("seed edge is infeasible") from None

    stack: list[_Frame] = []
    need_frame = True
    steps = 0
    while True:
        steps += 1
        if state.deadline is not None and steps % 256 == 0 and time.perf_counter() > state.deadline:
            raise DeadlineReached()
        if need_frame:
            if is_complete(state):
                mark = state.checkpoint()
                done = _finish(state)
                if done is not None:
                    state.solution = done
                    state.commit_sample()
                    return state.le
                state.undo_to(mark)
                state.r_err += 1
            else:
                stack.append(_Frame(state.checkpoint(), state.x1, candidates(state, state.x1)))
        if not stack:
            raise ExpandSignal("no alternatives left")
        frame = stack[-1]
        state.undo_to(frame.mark)
        if frame.pos >= len(frame.cands):
            # dead end: unwind, jumping past checkpoints unrelated to the conflict set
            stack.pop()
            state.r_err += 1
            if cfg.backjump and state.C:
                while len(stack) > 1 and not _related(state, stack[-1]):
                    stack.pop()
            need_frame = False
            continue
        c = frame.cands[frame.pos]
        frame.pos += 1
        try:
            if c == SWAP:
                path_split(state)
            else:
                select_first(state, [c])
                if state.u_last_counts[c] >= limit:
                    raise ExpandSignal(f"vertex {c} committed {limit} times")
            valid_state(state)
            for w in state.C:
                state.A[w] = None
            state.C.clear()
            need_frame = True
        except ErrorSignal:
            state.r_err += 1
            state.undo_to(frame.mark)
            rest = frame.remaining()
            if len(rest) > 1:
                order = {u: i for i, u in enumerate(reorder(state, frame.v))}
                keep_swap = SWAP in rest
                rest = sorted((u for u in rest if u != SWAP), key=lambda u: order.get(u, len(order)))
                if keep_swap:
                    rest.append(SWAP)
                frame.cands[frame.pos:] = rest
            need_frame = False
