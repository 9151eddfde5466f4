import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robudom import constructors as C
from robudom import regime
from robudom.exact import exact_domination
from robudom.graph import Graph, GraphSpec, build_conflict, gen_bernoulli, graph_minus, is_dominating


def _valid(g, h, res):
    return is_dominating(graph_minus(g, h), res.dominating_set, ignore_isolated=res.ignore_isolated)


def test_alteration_size_and_validity():
    g = gen_bernoulli(GraphSpec(5000, 0.2, 1))
    h = build_conflict("star", 5000, delta=50)
    res = C.construct_alteration(g, h, 0.2, seed=1)
    un = regime.u_n(5000, 0.2)
    assert res.u_n == pytest.approx(30.956553475548507)
    # floor(1.2 * 30.9566) + 50 = 87 before repair
    assert res.core_size == 87 == res.params.t
    assert res.size == 87 + res.repair_size
    assert res.size <= 1.2 * un + 50 + res.repair_size
    assert _valid(g, h, res)


def test_alteration_preconditions():
    with pytest.raises(C.PreconditionError):
        C.construct_alteration(Graph.complete(10), build_conflict("empty", 10), p=1.0)
    g = gen_bernoulli(GraphSpec(50, 0.05, 1))
    with pytest.raises(C.PreconditionError):
        C.construct_alteration(g, build_conflict("star", 50, delta=45), 0.1)


def test_alteration_takes_high_degree_first():
    g = gen_bernoulli(GraphSpec(400, 0.3, 2))
    h = build_conflict("star", 400, delta=20)
    res = C.construct_alteration(g, h, 0.1)
    assert 0 in res.dominating_set


def test_alteration_no_repair_when_core_covers():
    g = Graph.complete(30)
    res = C.construct_alteration(g, build_conflict("empty", 30), 0.1, p=0.5)
    assert res.repair_size == 0


def test_sampling_params():
    zeta, t = C.sampling_params(10.0, 0.1, 0.1)
    assert 1 - zeta == pytest.approx(0.72 / 1.1)
    assert t == math.ceil(10.0 * 1.1 / 0.72) == 16
    with pytest.raises(C.PreconditionError):
        C.sampling_params(10.0, 0.6, 0.1)


def test_sampling_hypothesis_on_delta():
    g = gen_bernoulli(GraphSpec(200, 0.2, 3))
    with pytest.raises(C.PreconditionError) as err:
        C.construct_sampling(g, build_conflict("star", 200, delta=20), 0.1, 0.1)
    assert "r0" in err.value.hypothesis


def test_sampling_empty_h_small_r0():
    g = gen_bernoulli(GraphSpec(500, 0.05, 4))
    h = build_conflict("empty", 500)
    res = C.construct_sampling(g, h, 0.1, 0.01, seed=3)
    assert _valid(g, h, res)


@pytest.mark.slow
def test_sampling_size_bound_monte_carlo():
    n, p = 10_000, 0.1
    h = build_conflict("random_regular", n, d=500, seed=1)
    un = regime.u_n(n, p)
    ok = 0
    for s in range(100):
        g = gen_bernoulli(GraphSpec(n, p, 1000 + s))
        res = C.construct_sampling(g, h, 0.1, 0.1, seed=s)
        assert _valid(g, h, res)
        ok += res.size <= (1 + 6 * 0.1) / (1 - 0.1) * un
    assert ok >= 95


def test_iterative_params():
    theta1, t = C.iterative_params(2000, 0.05, 10, 0.1)
    assert theta1 == pytest.approx(0.0405)
    assert t == 124
    with pytest.raises(C.PreconditionError):
        C.iterative_params(100, 0.05, 50, 0.1)


def test_iterative_on_complete_graph():
    g = Graph.complete(40)
    h = build_conflict("empty", 40)
    early = C.construct_iterative(g, h, 0.1, seed=2, p=1.0, stop_when_covered=True)
    assert early.size == 1 and early.repair_size == 0
    # the literal procedure keeps drawing all t samples
    full = C.construct_iterative(g, h, 0.1, seed=2, p=1.0)
    assert full.repair_size == 0 and full.size <= full.params.t == 3


def test_iterative_coverage_trace():
    g = gen_bernoulli(GraphSpec(1000, 0.2, 5))
    h = build_conflict("star", 1000, delta=30)
    res = C.construct_iterative(g, h, 0.1, seed=9)
    assert len(res.coverage) == res.params.t
    assert all(a <= b for a, b in zip(res.coverage, res.coverage[1:]))
    assert _valid(g, h, res)
    early = C.construct_iterative(g, h, 0.1, seed=9, stop_when_covered=True)
    assert early.size <= res.size and _valid(g, h, early)


def test_distinct_params():
    q1, t = C.distinct_params(1000, 0.95, 50, 1.0)
    assert q1 == pytest.approx(0.05)
    assert t == 5
    with pytest.raises(C.PreconditionError):
        C.distinct_params(1000, 0.5, 0, 1.0)
    assert C.distinct_min_epsilon(0.05) == pytest.approx(2 / (-math.log2(0.05) - 2))
    assert C.distinct_min_epsilon(0.3) == math.inf


def test_distinct_on_complete_graph():
    g = Graph.complete(30)
    res = C.construct_distinct_tuple(g, build_conflict("empty", 30), 0.5, p=1.0)
    assert res.size == 1 and res.repair_size == 0


def test_distinct_draws_distinct_vertices():
    g = gen_bernoulli(GraphSpec(1000, 0.95, 6))
    h = build_conflict("star", 1000, delta=50)
    res = C.construct_distinct_tuple(g, h, 1.0, seed=4)
    assert res.core_size == res.params.t == 5
    assert _valid(g, h, res)


def test_preprocess():
    q, qc = C.preprocess_high_degree(build_conflict("empty", 10), 0.5)
    assert q.size == 10 and qc.size == 0
    q, qc = C.preprocess_high_degree(build_conflict("star", 10, delta=9), 0.5)
    assert qc.sorted() == [0]
    with pytest.raises(ValueError):
        C.preprocess_high_degree(build_conflict("empty", 10), 1.0)


def test_preprocessing_forces_high_degree_vertices():
    g = gen_bernoulli(GraphSpec(600, 0.3, 1))
    h = build_conflict("star", 600, delta=599)
    res = C.construct_iterative(g, h, 0.1, seed=1, preprocess=True)
    assert 0 in res.dominating_set and res.preprocessed_size == 1
    assert _valid(g, h, res)


def test_sparse_isolated_edges():
    k = 7
    g = Graph.from_edges(2 * k, [(2 * i, 2 * i + 1) for i in range(k)], p=0.01)
    res = C.construct_sparse(g, build_conflict("empty", 2 * k), ignore_isolated=True)
    assert res.size == k


def test_sparse_literal_includes_isolated():
    g = Graph.empty(9)
    res = C.construct_sparse(g, build_conflict("empty", 9))
    assert res.size == 9 and res.repair_size == 9
    lenient = C.construct_sparse(g, build_conflict("empty", 9), ignore_isolated=True)
    assert lenient.size == 0 and lenient.ignore_isolated


def test_sparse_is_exact_on_small_components():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(20, 120))
        g = gen_bernoulli(GraphSpec(n, float(rng.uniform(0.5, 2.0)) / n, int(rng.integers(1 << 40))))
        h = build_conflict("empty", n)
        res = C.construct_sparse(g, h)
        if n <= 32:
            assert res.size == exact_domination(g).gamma
        assert _valid(g, h, res)


def test_sparse_large_component_uses_greedy():
    g = gen_bernoulli(GraphSpec(200, 0.2, 1))
    res = C.construct_sparse(g, build_conflict("empty", 200))
    assert res.size == C.greedy_baseline(g).size


@pytest.mark.parametrize("g,size", [(Graph.complete(9), 1), (Graph.empty(4), 4), (Graph.cycle(6), 2)])
def test_greedy_examples(g, size):
    assert C.greedy_baseline(g).size == size


@pytest.mark.parametrize("n,p,h,route", [
    (10_000, 0.5, ("empty", {}), "auto/iterative"),
    (10_000, 0.999, ("star", {"delta": 3}), "auto/distinct"),
    (2000, 5 / 2000, ("empty", {}), "auto/alteration"),
    (2000, 0.5 / 2000, ("empty", {}), "auto/sparse"),
    (3000, 3000 ** -1.4, ("empty", {}), "auto/sparse"),
    (3000, 0.008, ("empty", {}), "auto/sampling"),
])
def test_auto_dispatch(n, p, h, route):
    g = gen_bernoulli(GraphSpec(n, p, 1))
    hh = build_conflict(h[0], n, **h[1])
    res = C.construct_auto(g, hh, 0.1, seed=1)
    assert res.method == route
    assert _valid(g, hh, res)


def test_auto_falls_back_to_greedy():
    # theta1 = 0.045 - 99/400 < 0 and the edge-count condition fails, so no preprocessing
    g = gen_bernoulli(GraphSpec(400, 0.05, 1))
    h = build_conflict("random_regular", 400, d=100, seed=1)
    res = C.construct_auto(g, h, 0.1, seed=1)
    assert res.method.startswith("auto/greedy[theta1")
    assert _valid(g, h, res)


def test_construct_dispatch_and_unknown():
    g = gen_bernoulli(GraphSpec(300, 0.3, 1))
    h = build_conflict("empty", 300)
    for m in C.METHODS:
        if m != "distinct":
            assert _valid(g, h, C.construct(m, g, h, 0.1, 1))
    with pytest.raises(C.PreconditionError):
        C.construct("distinct", g, h, 0.1, 1)
    with pytest.raises(ValueError):
        C.construct("magic", g, h)


def test_mismatched_conflict_rejected():
    with pytest.raises(ValueError):
        C.construct("alteration", Graph.complete(10), build_conflict("empty", 11), p=0.5)


@given(st.integers(2, 150), st.floats(0, 1), st.sampled_from(C.METHODS), st.integers(0, 2**40),
       st.sampled_from(["empty", "star", "matching"]), st.booleans())
@settings(max_examples=150, deadline=None)
def test_every_result_dominates(n, p, method, seed, hkind, ignore):
    g = gen_bernoulli(GraphSpec(n, p, seed))
    h = build_conflict(hkind, n, **({"delta": n // 3} if hkind == "star" else {"m": n // 4} if hkind == "matching"
                                     else {}))
    try:
        res = C.construct(method, g, h, 0.1, seed, ignore_isolated=ignore)
    except C.PreconditionError:
        return
    assert _valid(g, h, res)
    assert res.size == res.dominating_set.size


@given(st.integers(5, 300), st.floats(0.01, 0.99), st.sampled_from(C.METHODS), st.integers(0, 2**40))
@settings(max_examples=60, deadline=None)
def test_seed_determinism(n, p, method, seed):
    g = gen_bernoulli(GraphSpec(n, p, seed))
    h = build_conflict("star", n, delta=min(3, n - 1))
    try:
        a = C.construct(method, g, h, 0.1, seed)
    except C.PreconditionError:
        return
    b = C.construct(method, g, h, 0.1, seed)
    assert a.dominating_set == b.dominating_set and a.method == b.method
