import random

import pytest
from hypothesis import settings

from sfcmr.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def count_components(n, edges, removed=()):
    """Plain union-find component count over vertices not in ``removed``."""
    removed = set(removed)
    parent = {v: v for v in range(n) if v not in removed}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        if u in removed or v in removed:
            continue
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(v) for v in parent})


def brute_cut_vertices(n, edges, active=None):
    """Vertices whose deletion increases the number of components of the induced subgraph."""
    active = set(range(n)) if active is None else set(active)
    outside = set(range(n)) - active
    base = count_components(n, edges, outside)
    return {v for v in active if count_components(n, edges, outside | {v}) > base}


def random_connected(rng, n, p):
    """Random spanning tree plus extra edges with probability ``p``."""
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.add((u, v))
    return Graph.from_edges(n, sorted(edges), name=f"rand{n}")


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner, name="petersen")


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def cubic_hamiltonian(n, seed):
    """A Hamiltonian cycle on a random vertex order plus a random perfect matching."""
    rng = random.Random(seed)
    perm = list(range(n))
    rng.shuffle(perm)
    ring = {tuple(sorted((perm[i], perm[(i + 1) % n]))) for i in range(n)}
    while True:
        verts = list(range(n))
        rng.shuffle(verts)
        match = {tuple(sorted(verts[i:i + 2])) for i in range(0, n, 2)}
        if not match & ring:
            return Graph.from_edges(n, sorted(ring | match), name=f"cubic{n}")


@pytest.fixture
def rng():
    return random.Random(20240601)
