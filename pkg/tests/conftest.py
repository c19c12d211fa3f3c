"""Shared fixtures and reference oracles.

The oracles here restate the definitions as literally as possible (full
rescans, pairwise edge checks, subset enumeration) so that the optimized
implementations are tested against independent code, not against
themselves.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from contagion import Graph


def adjacency_sets(edges, n):
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def naive_percolate(adj, seeds, r):
    """Reference activation process: full rescan every round.

    Returns (generation dict for activated vertices, tau).
    """
    active = set(seeds)
    gen = {v: 0 for v in active}
    t = 0
    while True:
        newly = {
            v
            for v in adj
            if v not in active and len(adj[v] & active) >= r
        }
        if not newly:
            return gen, t
        t += 1
        for v in newly:
            gen[v] = t
        active |= newly


def naive_components(adj, restrict=None):
    """BFS components, sorted largest first then by smallest vertex."""
    allowed = set(adj) if restrict is None else set(restrict)
    seen = set()
    comps = []
    for start in sorted(allowed):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if w in allowed and w not in comp:
                        comp.add(w)
                        nxt.append(w)
            frontier = nxt
        seen |= comp
        comps.append(sorted(comp))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def naive_induced_edges(edges, subset):
    inside = set(subset)
    return sum(1 for u, v in edges if u in inside and v in inside)


def naive_min_contagious(adj, r, n):
    """Exhaustive minimum contagious set by subset enumeration."""
    for k in range(0, n + 1):
        for cand in itertools.combinations(range(n), k):
            gen, _ = naive_percolate(adj, cand, r)
            if len(gen) == n:
                return k, set(cand)
    raise AssertionError("unreachable: V itself is contagious")


PETERSEN_EDGES = (
    [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]
    + [(i, i + 5) for i in range(5)]
    + [(5, 7), (7, 9), (9, 6), (6, 8), (8, 5)]
)


@pytest.fixture
def c4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture
def k4_iso():
    # K4 plus an isolated vertex 4
    return Graph.from_edges(5, [(u, v) for u in range(4) for v in range(u + 1, 4)])


@pytest.fixture
def path5():
    return Graph.from_edges(5, [(i, i + 1) for i in range(4)])


@pytest.fixture
def star6():
    # center 0, five leaves
    return Graph.from_edges(6, [(0, i) for i in range(1, 6)])


@pytest.fixture
def petersen():
    return Graph.from_edges(10, PETERSEN_EDGES)


def complete_graph(n):
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def random_graph_edges(n, p, rng):
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return edges
