"""Static simple undirected graphs and seeded G(n, p) sampling.

Graphs are stored in compressed sparse row form (``indptr``/``indices``),
which keeps neighbor scans cache-friendly at the sizes the experiment
harness uses (up to a few times 10^7 arcs).  Vertices are the integers
``0 .. vertex_count - 1`` and every adjacency row is sorted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "Graph",
    "GnpParams",
    "GraphFormatError",
    "sample_gnp",
    "connected_components",
    "induced_edge_count",
    "is_connected",
    "load_edge_list",
    "save_edge_list",
]


class GraphFormatError(ValueError):
    """Malformed edge-list input; the message names the offending line."""


def as_vertex_array(vertices: Iterable[int], n: int, *, what: str = "vertex") -> np.ndarray:
    """Normalize an iterable of vertex ids into a sorted unique int64 array.

    Raises ValueError if any id falls outside ``[0, n)``.
    """
    if isinstance(vertices, np.ndarray):
        arr = vertices.astype(np.int64, copy=False)
    else:
        arr = np.fromiter(vertices, dtype=np.int64)
    if arr.size:
        arr = np.unique(arr)
        if arr[0] < 0 or arr[-1] >= n:
            bad = int(arr[0]) if arr[0] < 0 else int(arr[-1])
            raise ValueError(f"{what} id {bad} out of range for graph with {n} vertices")
    return arr


class Graph:
    """Immutable simple undirected graph in CSR form.

    ``indices[indptr[v]:indptr[v+1]]`` is the sorted neighbor row of ``v``.
    Instances are cheap to share between worker processes because the state
    is two flat numpy arrays.
    """

    def __init__(self, vertex_count: int, indptr: np.ndarray, indices: np.ndarray):
        self.vertex_count = int(vertex_count)
        self.indptr = indptr
        self.indices = indices
        self.edge_count = int(indices.size) // 2

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int32))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from (u, v) pairs, validating as it goes.

        Pairs may appear in either orientation; self-loops and duplicate
        edges raise GraphFormatError.
        """
        if n < 0:
            raise GraphFormatError("vertex count must be nonnegative")
        seen: set[tuple[int, int]] = set()
        us: list[int] = []
        vs: list[int] = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for {n} vertices")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphFormatError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)
            us.append(key[0])
            vs.append(key[1])
        return cls._from_pair_arrays(
            n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)
        )

    @classmethod
    def _from_pair_arrays(cls, n: int, us: np.ndarray, vs: np.ndarray) -> "Graph":
        # Trusted path: callers guarantee u < v, uniqueness, and range.
        src = np.concatenate([us, vs])
        dst = np.concatenate([vs, us])
        deg = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        order = np.argsort(src * np.int64(n) + dst, kind="stable")
        indices = dst[order].astype(np.int32)
        return cls(n, indptr, indices)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor row of ``v`` (a read-only view, do not mutate)."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Adjacency as plain Python lists; built lazily, meant for small graphs."""
        indptr, indices = self.indptr, self.indices
        flat = indices.tolist()
        return [flat[indptr[v] : indptr[v + 1]] for v in range(self.vertex_count)]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as (u, v) with u < v, in lexicographic order."""
        for u in range(self.vertex_count):
            for w in self.neighbors(u):
                if w > u:
                    yield u, int(w)

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on any breach."""
        n = self.vertex_count
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0:
            raise ValueError("indptr malformed")
        if np.any(np.diff(self.indptr) < 0) or self.indptr[-1] != self.indices.size:
            raise ValueError("indptr not monotone or inconsistent with indices")
        if self.indices.size != 2 * self.edge_count:
            raise ValueError("edge_count inconsistent with adjacency size")
        if self.indices.size == 0:
            return
        if self.indices.min() < 0 or self.indices.max() >= n:
            raise ValueError("neighbor id out of range")
        src = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.indptr))
        dst = self.indices.astype(np.int64)
        if np.any(src == dst):
            raise ValueError("self-loop present")
        same_row = src[1:] == src[:-1]
        if np.any(same_row & (dst[1:] <= dst[:-1])):
            raise ValueError("adjacency rows not strictly increasing (unsorted or duplicate)")
        if not np.array_equal(np.sort(src * n + dst), np.sort(dst * n + src)):
            raise ValueError("adjacency not symmetric")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self) -> int:  # identity hash; content equality is for tests
        return id(self)

    def __repr__(self) -> str:
        return f"Graph(n={self.vertex_count}, m={self.edge_count})"


def gather_rows(graph: Graph, verts: np.ndarray) -> np.ndarray:
    """Concatenate the adjacency rows of ``verts`` without a Python loop."""
    indptr, indices = graph.indptr, graph.indices
    verts = verts.astype(np.int64, copy=False)
    counts = indptr[verts + 1] - indptr[verts]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    starts = indptr[verts]
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    idx = np.repeat(starts - offsets, counts) + np.arange(total, dtype=np.int64)
    return indices[idx]


@dataclass(frozen=True)
class GnpParams:
    """Parameters of one G(n, p) draw.  ``d`` exposes the mean degree n*p."""

    n: int
    p: float
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")

    @property
    def d(self) -> float:
        return self.n * self.p


def sample_gnp(params: GnpParams) -> Graph:
    """Sample G(n, p): every unordered pair is an edge independently with prob p.

    Sparse draws walk the lexicographic pair order with geometric skip
    lengths, so the cost is O(n + m) rather than O(n^2).  p == 1 falls back
    to direct enumeration of all pairs (sensible up to n of a few times
    10^4, where the complete graph itself is the memory bound).  The same
    params, including the seed, always reproduce the identical graph.
    """
    n, p = params.n, params.p
    npairs = n * (n - 1) // 2
    if npairs == 0 or p == 0.0:
        return Graph.empty(n)
    rng = np.random.Generator(np.random.PCG64(params.rng_seed))
    if p >= 1.0:
        linear = np.arange(npairs, dtype=np.int64)
    else:
        linear = _skip_sample(rng, npairs, p)
    if linear.size == 0:
        return Graph.empty(n)
    us, vs = _pairs_from_linear(n, linear)
    return Graph._from_pair_arrays(n, us, vs)


def _skip_sample(rng: np.random.Generator, npairs: int, p: float) -> np.ndarray:
    """Positions of successes in a length-``npairs`` Bernoulli(p) stream."""
    chunks: list[np.ndarray] = []
    cursor = -1
    while True:
        remaining = npairs - cursor  # > 0
        expect = remaining * p
        size = int(expect + 8.0 * math.sqrt(expect + 1.0) + 16.0)
        jumps = rng.geometric(p, size=size).astype(np.int64, copy=False)
        positions = cursor + np.cumsum(jumps)
        if positions[-1] >= npairs:
            chunks.append(positions[positions < npairs])
            break
        chunks.append(positions)
        cursor = int(positions[-1])
    return np.concatenate(chunks)


def _pairs_from_linear(n: int, linear: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map lexicographic pair ranks to (u, v) with u < v.

    Rank 0 is (0, 1), rank n-2 is (0, n-1), rank n-1 is (1, 2), and so on.
    """
    u_range = np.arange(n, dtype=np.int64)
    row_starts = u_range * n - (u_range * (u_range + 1)) // 2
    us = np.searchsorted(row_starts, linear, side="right") - 1
    vs = linear - row_starts[us] + us + 1
    return us, vs


def connected_components(
    graph: Graph, restrict: Iterable[int] | None = None
) -> list[list[int]]:
    """Components of the subgraph induced on ``restrict`` (whole graph if None).

    Returned as sorted member lists, ordered by size descending and then by
    smallest member id ascending, so callers can take the head as "largest".
    """
    n = graph.vertex_count
    if restrict is None:
        members = np.arange(n, dtype=np.int64)
    else:
        members = as_vertex_array(restrict, n)
    in_set = np.zeros(n, dtype=bool)
    in_set[members] = True
    seen = np.zeros(n, dtype=bool)
    components: list[list[int]] = []
    for start in members.tolist():
        if seen[start]:
            continue
        seen[start] = True
        waves = [np.array([start], dtype=np.int64)]
        frontier = waves[0]
        while frontier.size:
            nbrs = gather_rows(graph, frontier)
            nbrs = nbrs[in_set[nbrs] & ~seen[nbrs]]
            if nbrs.size == 0:
                break
            frontier = np.unique(nbrs).astype(np.int64)
            seen[frontier] = True
            waves.append(frontier)
        comp = np.sort(np.concatenate(waves))
        components.append([int(v) for v in comp])
    components.sort(key=lambda c: (-len(c), c[0]))
    return components


def is_connected(graph: Graph) -> bool:
    """True when every vertex is reachable from vertex 0 (and n <= 1 trivially)."""
    n = graph.vertex_count
    if n <= 1:
        return True
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    count = 1
    while frontier.size:
        nbrs = gather_rows(graph, frontier)
        nbrs = nbrs[~seen[nbrs]]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs).astype(np.int64)
        seen[frontier] = True
        count += frontier.size
    return count == n


def induced_edge_count(graph: Graph, subset: Iterable[int]) -> int:
    """Number of edges with both endpoints in ``subset``."""
    arr = as_vertex_array(subset, graph.vertex_count)
    if arr.size < 2:
        return 0
    mask = np.zeros(graph.vertex_count, dtype=bool)
    mask[arr] = True
    nbrs = gather_rows(graph, arr)
    return int(np.count_nonzero(mask[nbrs])) // 2


def load_edge_list(path) -> Graph:
    """Read the plain edge-list format.

    Line 1 is ``n m``; each of the following m lines is ``u v`` with
    0-indexed endpoints and u < v.  Self-loops, duplicates, out-of-range
    ids, and malformed lines raise GraphFormatError naming the line.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise GraphFormatError("line 1: expected header 'n m'")
        try:
            n, m = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError("line 1: expected two integers 'n m'") from None
        if n < 0 or m < 0:
            raise GraphFormatError("line 1: n and m must be nonnegative")
        us = np.empty(m, dtype=np.int64)
        vs = np.empty(m, dtype=np.int64)
        seen: set[int] = set()
        count = 0
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            if count >= m:
                raise GraphFormatError(f"line {lineno}: more than {m} edges")
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: expected two integers") from None
            if u == v:
                raise GraphFormatError(f"line {lineno}: self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"line {lineno}: vertex id out of range")
            if u > v:
                raise GraphFormatError(f"line {lineno}: endpoints must satisfy u < v")
            key = u * n + v
            if key in seen:
                raise GraphFormatError(f"line {lineno}: duplicate edge {u} {v}")
            seen.add(key)
            us[count] = u
            vs[count] = v
            count += 1
        if count != m:
            raise GraphFormatError(f"expected {m} edges, found {count}")
    return Graph._from_pair_arrays(n, us, vs)


def save_edge_list(graph: Graph, path) -> None:
    """Write the format ``load_edge_list`` reads, edges in lexicographic order."""
    n = graph.vertex_count
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
    dst = graph.indices.astype(np.int64)
    keep = src < dst
    pairs = np.stack([src[keep], dst[keep]], axis=1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{n} {graph.edge_count}\n")
        np.savetxt(fh, pairs, fmt="%d")
