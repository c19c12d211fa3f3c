"""Constructing small contagious sets on dense-enough random graphs.

Two procedures live here.  ``construct_contagious`` builds a seed set by a
staged schedule: it grows a ladder of vertex blocks whose sizes double as
the stage index rises, seeding one vertex per connected component inside
each block so that an activated block pays for itself, then lets the
process run and absorbs whatever remains inactive.  On graphs it can
certify nothing about (too sparse, disconnected, or too small for the
schedule) it falls back to mandatory seeds plus greedy completion.

``search_minimal_tuple`` hunts for an r-element contagious set by drawing
r pool vertices, extending them through a blocked pool partition where the
j-th extension must already see r chosen neighbors, and percolating the
initial r to check the find.  Both procedures re-verify every returned set
with the engine; an unverifiable return is an internal error, never a
silent result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import Graph, connected_components, gather_rows, is_connected
from .percolation import NEVER, PercolationResult, mandatory_seeds, percolate

__all__ = [
    "StageParams",
    "IterationRecord",
    "ConstructionTrace",
    "ConstructionError",
    "construct_contagious",
    "TupleSearchParams",
    "search_minimal_tuple",
]


class ConstructionError(RuntimeError):
    """A constructed certificate failed engine re-verification (internal bug)."""


@dataclass(frozen=True)
class StageParams:
    """Knobs of the staged constructor.

    ``d0_min`` is the mean degree below which the staged schedule refuses
    and the greedy fallback runs instead.  ``c_seed`` scales the initial
    block size; None picks 1 for r = 2 and min(ceil(102 * (r-1)^(r-1)), 100)
    for r >= 3.  ``log_base`` is fixed to 2 and recorded for audit only.
    """

    r: int = 2
    d0_min: float = 4.0
    c_seed: float | None = None
    log_base: int = 2

    def __post_init__(self) -> None:
        if int(self.r) != self.r or self.r < 2:
            raise ValueError("threshold r must be an integer >= 2")
        if self.d0_min < 0:
            raise ValueError("d0_min must be nonnegative")
        if self.c_seed is not None and self.c_seed <= 0:
            raise ValueError("c_seed must be positive")
        if self.log_base != 2:
            raise ValueError("log_base is fixed to 2")

    def resolved_c_seed(self) -> float:
        if self.c_seed is not None:
            return float(self.c_seed)
        if self.r == 2:
            return 1.0
        return float(min(math.ceil(6 * 17 * (self.r - 1) ** (self.r - 1)), 100))


@dataclass
class IterationRecord:
    """Audit record of one ladder iteration."""

    index: int
    s_target: float
    s_i: int
    b_target: int
    b_i: list[int]
    x_i: int
    y_i: int
    selected_components: list[list[int]]
    d_i: list[int]
    c_i: list[int]
    failed: bool
    reason: str | None

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "s_target": self.s_target,
            "s_i": self.s_i,
            "b_target": self.b_target,
            "b_i": self.b_i,
            "x_i": self.x_i,
            "y_i": self.y_i,
            "selected_components": self.selected_components,
            "d_i": self.d_i,
            "c_i": self.c_i,
            "failed": self.failed,
            "reason": self.reason,
        }


@dataclass
class ConstructionTrace:
    """Everything the constructor did, for audit and replay in tests.

    ``final_seeds`` always equals sorted(a01 union a02).  ``fallback_used``
    marks runs that skipped the staged schedule entirely.
    """

    ell: int
    d: float
    initial_block: list[int]
    iterations: list[IterationRecord] = field(default_factory=list)
    a01: list[int] = field(default_factory=list)
    a02: list[int] = field(default_factory=list)
    final_seeds: list[int] = field(default_factory=list)
    fallback_used: bool = False

    def to_json_dict(self) -> dict:
        return {
            "ell": self.ell,
            "d": self.d,
            "initial_block": self.initial_block,
            "iterations": [rec.to_json_dict() for rec in self.iterations],
            "a01": self.a01,
            "a02": self.a02,
            "final_seeds": self.final_seeds,
            "fallback_used": self.fallback_used,
        }


def construct_contagious(
    graph: Graph, params: StageParams | None = None, rng_seed: int = 0
) -> tuple[frozenset[int], ConstructionTrace]:
    """Build a verified contagious set for ``graph`` under threshold params.r.

    The procedure is deterministic: block choices break ties toward lower
    vertex ids, so ``rng_seed`` is accepted for interface stability but the
    current schedule never consumes randomness.  The returned set is always
    re-verified contagious by the engine before this function returns.
    """
    params = params or StageParams()
    n = graph.vertex_count
    r = params.r
    d = 2.0 * graph.edge_count / n if n else 0.0
    c_seed = params.resolved_c_seed()
    exponent = r / (r - 1)
    initial_target = 0
    if d > 1.0:
        initial_target = int(c_seed * n / (d**exponent * math.log2(d)))

    if d < params.d0_min or initial_target < 1 or not is_connected(graph):
        seeds, trace = _fallback_construct(graph, r, d)
    else:
        seeds, trace = _staged_construct(graph, r, d, c_seed, initial_target)

    check = percolate(graph, seeds, r)
    if not check.contagious:
        raise ConstructionError(
            f"constructed set of size {len(seeds)} failed verification "
            f"({check.active_count} of {n} active)"
        )
    return seeds, trace


def _staged_construct(graph, r, d, c_seed, initial_target):
    n = graph.vertex_count
    log_d = math.log2(d)
    exponent = r / (r - 1)
    ell = max(1, math.ceil(math.log2(log_d)))

    initial = list(range(initial_target))
    used = np.zeros(n, dtype=bool)
    used[:initial_target] = True
    used_total = initial_target
    pool_budget = n // 10  # cumulative block consumption cap
    c_prev = np.arange(initial_target, dtype=np.int64)
    iterations: list[IterationRecord] = []
    seed_blocks: list[list[int]] = []

    for i in range(1, ell + 1):
        if r == 2:
            s_target = (log_d - 4.0) / (ell - i + 4.0)
            b_formula = int(d * c_prev.size / 2.0)
        else:
            s_target = log_d / ((ell - i + 1.0) * r * r)
            b_formula = int(
                c_seed ** (r - 1)
                * n
                / (2.0 ** ((ell - i + 1) * (r - 1) + 1) * d * (r - 1) ** (r - 1))
            )
        s_i = max(1, int(math.floor(s_target + 0.5)))
        c_target = int(c_seed * n / (d**exponent * 2.0 ** (ell - i)))

        b_cap = min(b_formula, max(0, pool_budget - used_total))
        # Eligible vertices: r - 1 or more neighbors landing in the previous
        # block's kept core, and not consumed by any earlier block.
        if c_prev.size:
            nbrs = gather_rows(graph, c_prev)
            cand, counts = np.unique(nbrs, return_counts=True)
            eligible = cand[(counts >= r - 1) & ~used[cand]]
        else:
            eligible = np.empty(0, dtype=np.int64)
        b_i = eligible[:b_cap].astype(np.int64)
        used[b_i] = True
        used_total += int(b_i.size)

        components = connected_components(graph, b_i)
        x_i = len(components)
        y_i = min(x_i, c_target // s_i)
        selected = components[:y_i]
        d_i = [comp[0] for comp in selected]
        pooled: list[int] = []
        for comp in selected:
            pooled.extend(comp)
        c_i = pooled[:c_target]

        failed = False
        reasons = []
        if b_i.size < b_formula:
            failed = True
            reasons.append(f"block supply {int(b_i.size)} short of target {b_formula}")
        if len(c_i) < c_target:
            failed = True
            reasons.append(f"kept core {len(c_i)} short of target {c_target}")
        iterations.append(
            IterationRecord(
                index=i,
                s_target=s_target,
                s_i=s_i,
                b_target=b_formula,
                b_i=[int(v) for v in b_i],
                x_i=x_i,
                y_i=y_i,
                selected_components=selected,
                d_i=d_i,
                c_i=c_i,
                failed=failed,
                reason="; ".join(reasons) if reasons else None,
            )
        )
        seed_blocks.append(d_i)
        c_prev = np.asarray(sorted(c_i), dtype=np.int64)

    a01_set: set[int] = set(initial)
    for block in seed_blocks:
        a01_set.update(block)
    a01 = sorted(a01_set)
    stage_run = percolate(graph, a01, r)
    a02 = np.flatnonzero(stage_run.generation == NEVER).tolist()
    final = sorted(a01_set.union(a02))
    trace = ConstructionTrace(
        ell=ell,
        d=d,
        initial_block=initial,
        iterations=iterations,
        a01=a01,
        a02=a02,
        final_seeds=final,
        fallback_used=False,
    )
    return frozenset(final), trace


def _fallback_construct(graph, r, d):
    """Mandatory seeds plus greedy max-degree completion; always succeeds."""
    n = graph.vertex_count
    base = sorted(mandatory_seeds(graph, r))
    seeds = set(base)
    additions: list[int] = []
    result = percolate(graph, seeds, r)
    while not result.contagious:
        inactive = np.flatnonzero(result.generation == NEVER)
        # argmax returns the first maximum, so ties go to the lowest id
        pick = int(inactive[np.argmax(graph.degrees[inactive])])
        seeds.add(pick)
        additions.append(pick)
        result = percolate(graph, seeds, r)
    final = sorted(seeds)
    trace = ConstructionTrace(
        ell=0,
        d=d,
        initial_block=[],
        iterations=[],
        a01=base,
        a02=sorted(additions),
        final_seeds=final,
        fallback_used=True,
    )
    return frozenset(final), trace


@dataclass(frozen=True)
class TupleSearchParams:
    """Knobs of the r-tuple search.

    ``k_target`` is the chain length the search tries to assemble before
    percolating (at least r + 1); the helper ``for_graph`` derives it as
    max(r + 1, round(c1 * log2 n)) and the iteration budget as n // (2k).
    """

    r: int = 2
    k_target: int = 3
    c1: float = 0.1
    max_iterations: int = 1
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if int(self.r) != self.r or self.r < 2:
            raise ValueError("threshold r must be an integer >= 2")
        if self.k_target < self.r + 1:
            raise ValueError("k_target must be at least r + 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.c1 <= 0:
            raise ValueError("c1 must be positive")

    @classmethod
    def for_graph(
        cls, n: int, r: int = 2, c1: float = 0.1, rng_seed: int = 0
    ) -> "TupleSearchParams":
        k = r + 1
        if n >= 2:
            k = max(r + 1, int(math.floor(c1 * math.log2(n) + 0.5)))
        return cls(
            r=r,
            k_target=k,
            c1=c1,
            max_iterations=max(1, n // (2 * k)),
            rng_seed=rng_seed,
        )


def search_minimal_tuple(
    graph: Graph, params: TupleSearchParams
) -> tuple[frozenset[int], PercolationResult] | None:
    """Look for an r-set whose activation reaches the whole graph.

    Each iteration draws r pool vertices, splits the rest of the pool into
    k_target - r blocks by round-robin over a seeded shuffle, and extends
    the chain one block at a time: the j-th extension must already have r
    neighbors among the chosen.  A completed chain triggers a percolation
    from the r initial vertices; a contagious run is returned, anything
    else dumps the used vertices from the pool and iterates.  Returns None
    when the iteration budget or the pool runs out.
    """
    n = graph.vertex_count
    r, k = params.r, params.k_target
    if n < k:
        raise ValueError("graph smaller than k_target")
    rng = np.random.Generator(np.random.PCG64(params.rng_seed))
    in_pool = np.ones(n, dtype=bool)
    pool_size = n
    counts = np.zeros(n, dtype=np.int64)
    num_blocks = k - r
    block_of = np.full(n, -1, dtype=np.int64) if num_blocks > 1 else None

    for _ in range(params.max_iterations):
        if pool_size < k:
            break
        chosen: list[int] = []
        touched: list[np.ndarray] = []
        ready: set[int] = set()

        def bump(u: int) -> None:
            row = graph.neighbors(u)
            if row.size == 0:
                return
            touched.append(row)
            counts[row] += 1
            crossed = row[counts[row] == r]
            if crossed.size:
                ready.update(crossed.tolist())

        while len(chosen) < r:
            v = int(rng.integers(0, n))
            if in_pool[v]:
                in_pool[v] = False
                pool_size -= 1
                chosen.append(v)
                bump(v)
        if num_blocks > 1:
            rest = np.flatnonzero(in_pool)
            perm = rng.permutation(rest)
            block_of[perm] = np.arange(perm.size, dtype=np.int64) % num_blocks

        completed = True
        for j in range(r + 1, k + 1):
            block = j - r - 1
            best = None
            for v in ready:
                if not in_pool[v]:
                    continue
                if num_blocks > 1 and block_of[v] != block:
                    continue
                if best is None or v < best:
                    best = v
            if best is None:
                completed = False
                break
            in_pool[best] = False
            pool_size -= 1
            chosen.append(best)
            bump(best)

        if completed:
            result = percolate(graph, chosen[:r], r)
            if result.contagious:
                return frozenset(chosen[:r]), result
        if touched:
            counts[np.concatenate(touched)] = 0
    return None
