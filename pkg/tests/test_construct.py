"""Staged constructor, fallback path, and the minimal-tuple search."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from contagion import (
    GnpParams,
    Graph,
    StageParams,
    TupleSearchParams,
    construct_contagious,
    mandatory_seeds,
    percolate,
    sample_gnp,
    search_minimal_tuple,
)

from conftest import complete_graph

PROPERTY_SETTINGS = settings(
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


def assert_contagious(graph, seeds, r=2):
    res = percolate(graph, seeds, r)
    assert res.contagious, f"set of size {len(seeds)} is not contagious"
    return res


class TestStageParams:
    def test_defaults(self):
        params = StageParams()
        assert params.r == 2
        assert params.d0_min == 4.0
        assert params.resolved_c_seed() == 1.0

    def test_general_r_seed_constant(self):
        # r=3: ceil(6 * 17 * 2^2) = 408, capped at 100
        assert StageParams(r=3).resolved_c_seed() == 100.0

    def test_explicit_seed_constant_wins(self):
        assert StageParams(r=3, c_seed=2.5).resolved_c_seed() == 2.5

    def test_rejects_bad_r(self):
        with pytest.raises(ValueError):
            StageParams(r=1)


class TestConstructor:
    def test_complete_graph_certificate(self):
        g = complete_graph(10)
        seeds, trace = construct_contagious(g)
        assert_contagious(g, seeds)
        assert len(seeds) <= 10

    def test_small_dense_random(self):
        g = sample_gnp(GnpParams(200, 0.2, 3))
        seeds, trace = construct_contagious(g)
        assert_contagious(g, seeds)
        assert len(seeds) < 200

    def test_deterministic(self):
        g = sample_gnp(GnpParams(3000, 0.01, 5))
        s1, t1 = construct_contagious(g)
        s2, t2 = construct_contagious(g)
        assert s1 == s2
        assert t1.to_json_dict() == t2.to_json_dict()

    def test_staged_path_engages_at_scale(self):
        n, d = 20_000, 40.0
        g = sample_gnp(GnpParams(n, d / n, 3))
        seeds, trace = construct_contagious(g)
        assert not trace.fallback_used
        assert trace.ell >= 1
        assert len(trace.iterations) == trace.ell
        assert_contagious(g, seeds)
        # the two stages partition the final set
        assert frozenset(trace.a01) | frozenset(trace.a02) == seeds

    def test_trace_iteration_invariants(self):
        # scale chosen so the initial block formula lands above 1
        n, d = 50_000, 60.0
        g = sample_gnp(GnpParams(n, d / n, 8))
        seeds, trace = construct_contagious(g)
        assert not trace.fallback_used
        for rec in trace.iterations:
            assert rec.s_i >= 1
            assert len(rec.b_i) <= rec.b_target
            assert rec.y_i <= rec.x_i
            assert len(rec.d_i) == rec.y_i
            assert len(rec.selected_components) == rec.y_i
            # each selected component contributes its smallest vertex
            for comp, rep in zip(rec.selected_components, rec.d_i):
                assert rep == min(comp)
            if not rec.failed:
                assert rec.c_i  # pool never empty on a successful iteration
        assert_contagious(g, seeds)

    def test_fallback_on_low_degree(self):
        # mean degree below the cutoff routes to the greedy path
        g = sample_gnp(GnpParams(500, 2.0 / 500, 4))
        seeds, trace = construct_contagious(g)
        assert trace.fallback_used
        assert_contagious(g, seeds)

    def test_fallback_on_disconnected(self, k4_iso):
        seeds, trace = construct_contagious(k4_iso)
        assert trace.fallback_used
        assert_contagious(k4_iso, seeds)
        assert 4 in seeds  # isolated vertex is mandatory

    def test_fallback_includes_mandatory(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4)])
        seeds, trace = construct_contagious(g)
        assert trace.fallback_used
        must = mandatory_seeds(g, 2)
        assert must <= seeds
        assert_contagious(g, seeds)

    def test_empty_graph(self):
        g = Graph.empty(3)
        seeds, trace = construct_contagious(g)
        assert seeds == frozenset({0, 1, 2})
        assert trace.fallback_used

    def test_zero_vertices(self):
        g = Graph.empty(0)
        seeds, trace = construct_contagious(g)
        assert seeds == frozenset()

    def test_general_r(self):
        g = sample_gnp(GnpParams(2000, 0.05, 6))
        seeds, trace = construct_contagious(g, StageParams(r=3))
        res = percolate(g, seeds, 3)
        assert res.contagious

    def test_trace_json_round_trip(self):
        g = sample_gnp(GnpParams(20_000, 40.0 / 20_000, 3))
        _, trace = construct_contagious(g)
        blob = json.dumps(trace.to_json_dict(), sort_keys=True)
        parsed = json.loads(blob)
        assert parsed["ell"] == trace.ell
        assert parsed["fallback_used"] is False
        assert len(parsed["iterations"]) == trace.ell


class TestConstructorProperties:
    @PROPERTY_SETTINGS
    @given(
        n=st.integers(min_value=1, max_value=120),
        p=st.sampled_from([0.0, 0.05, 0.2, 0.5]),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_always_returns_verified_set(self, n, p, seed):
        g = sample_gnp(GnpParams(n, p, seed))
        seeds, trace = construct_contagious(g)
        res = percolate(g, seeds, 2)
        assert res.contagious
        assert seeds <= frozenset(range(n))


class TestTupleSearchParams:
    def test_for_graph_formula(self):
        # max(r + 1, round(0.1 * log2 n))
        params = TupleSearchParams.for_graph(2**40, r=2, c1=0.1, rng_seed=0)
        assert params.k_target == 4
        params2 = TupleSearchParams.for_graph(1000, r=2, c1=0.1, rng_seed=0)
        assert params2.k_target == 3

    def test_rejects_small_k(self):
        with pytest.raises(ValueError):
            TupleSearchParams(r=2, k_target=2, max_iterations=1, rng_seed=0)


class TestTupleSearch:
    def test_complete_graph_any_pair_works(self):
        g = complete_graph(6)
        params = TupleSearchParams(r=2, k_target=3, max_iterations=50, rng_seed=1)
        found = search_minimal_tuple(g, params)
        assert found is not None
        seeds, res = found
        assert len(seeds) == 2
        assert res.contagious

    def test_edgeless_graph_fails(self):
        g = Graph.empty(30)
        params = TupleSearchParams(r=2, k_target=3, max_iterations=50, rng_seed=1)
        assert search_minimal_tuple(g, params) is None

    def test_stalling_graph_exhausts_iterations(self, path5):
        params = TupleSearchParams(r=2, k_target=3, max_iterations=20, rng_seed=0)
        assert search_minimal_tuple(path5, params) is None

    def test_deterministic(self):
        n = 4000
        p = 4.0 / math.sqrt(n * math.log(n))
        g = sample_gnp(GnpParams(n, p, 21))
        params = TupleSearchParams(r=2, k_target=3, max_iterations=500, rng_seed=9)
        a = search_minimal_tuple(g, params)
        b = search_minimal_tuple(g, params)
        assert a is not None and b is not None
        assert a[0] == b[0]

    def test_found_tuple_is_minimal_size(self):
        n = 4000
        p = 4.0 / math.sqrt(n * math.log(n))
        g = sample_gnp(GnpParams(n, p, 33))
        params = TupleSearchParams.for_graph(n, r=2, c1=0.1, rng_seed=3)
        found = search_minimal_tuple(g, params)
        assert found is not None
        seeds, res = found
        assert len(seeds) == params.r
        assert res.contagious
        assert res.seeds == seeds

    def test_tiny_pool_rejected(self):
        g = complete_graph(2)
        params = TupleSearchParams(r=2, k_target=3, max_iterations=5, rng_seed=0)
        with pytest.raises(ValueError):
            search_minimal_tuple(g, params)

    def test_near_threshold_success_rate(self):
        # the search should succeed on most supercritical instances
        n = 20_000
        p = 4.0 / math.sqrt(n * math.log(n))
        hits = 0
        trials = 10
        for s in range(trials):
            g = sample_gnp(GnpParams(n, p, 1000 + s))
            params = TupleSearchParams.for_graph(n, r=2, c1=0.1, rng_seed=s)
            found = search_minimal_tuple(g, params)
            if found is not None:
                seeds, res = found
                assert res.contagious
                hits += 1
        assert hits >= 8, f"tuple search succeeded only {hits}/{trials} times"
