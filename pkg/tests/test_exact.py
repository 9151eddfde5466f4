from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robudom.exact import MAX_EXACT_N, closed_masks, exact_domination, exact_gamma_pair
from robudom.graph import ConflictGraph, Graph, GraphSpec, build_conflict, gen_bernoulli, graph_minus, is_dominating


def brute_gamma(g: Graph) -> int:
    """Smallest k such that some k-subset dominates; plain enumeration."""
    masks = closed_masks(g)
    full = (1 << g.n) - 1
    for k in range(g.n + 1):
        for combo in combinations(range(g.n), k):
            cov = 0
            for v in combo:
                cov |= masks[v]
            if cov == full:
                return k
    raise AssertionError("unreachable")


@pytest.mark.parametrize("g,gamma", [
    (Graph.complete(7), 1),
    (Graph.empty(4), 4),
    (Graph.cycle(5), 2),
    (Graph.path(4), 2),
    (Graph.cycle(6), 2),
    (Graph.cycle(9), 3),
    (Graph.empty(1), 1),
])
def test_examples(g, gamma):
    res = exact_domination(g)
    assert res.gamma == gamma
    assert res.witness.size == gamma and is_dominating(g, res.witness)


def test_rejects_large_n():
    with pytest.raises(ValueError):
        exact_domination(Graph.empty(MAX_EXACT_N + 1))


def test_agrees_with_brute_force_500_graphs():
    rng = np.random.default_rng(2024)
    for i in range(500):
        n = int(rng.integers(1, 13))
        g = gen_bernoulli(GraphSpec(n, float(rng.uniform()), int(rng.integers(1 << 62))))
        res = exact_domination(g)
        assert res.gamma == brute_gamma(g), (i, g.to_text())
        assert is_dominating(g, res.witness)


def test_no_smaller_set_up_to_16():
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(13, 17))
        g = gen_bernoulli(GraphSpec(n, float(rng.uniform(0.1, 0.5)), int(rng.integers(1 << 62))))
        res = exact_domination(g)
        masks = closed_masks(g)
        full = (1 << n) - 1
        for combo in combinations(range(n), res.gamma - 1):
            cov = 0
            for v in combo:
                cov |= masks[v]
            assert cov != full


def test_deterministic_witness():
    g = gen_bernoulli(GraphSpec(24, 0.2, 5))
    assert exact_domination(g) == exact_domination(g)


@given(st.integers(2, 12), st.floats(0, 1), st.integers(0, 2**32), st.data())
@settings(max_examples=80, deadline=None)
def test_antitone_under_edge_addition(n, p, seed, data):
    g = gen_bernoulli(GraphSpec(n, p, seed))
    u = data.draw(st.integers(0, n - 1))
    v = data.draw(st.integers(0, n - 1).filter(lambda x: x != u))
    edges = set(map(tuple, g.edges().tolist())) | {(min(u, v), max(u, v))}
    bigger = Graph.from_edges(n, sorted(edges))
    assert exact_domination(bigger).gamma <= exact_domination(g).gamma


@given(st.integers(2, 14), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**32))
@settings(max_examples=80, deadline=None)
def test_removing_conflicts_never_helps(n, p, q, seed):
    g = gen_bernoulli(GraphSpec(n, p, seed))
    h = ConflictGraph(gen_bernoulli(GraphSpec(n, q, seed ^ 0xABCDEF)), "edge_list")
    gg, gh = exact_gamma_pair(g, h)
    assert gh >= gg


def test_gamma_pair_examples():
    g = gen_bernoulli(GraphSpec(12, 0.3, 1))
    a, b = exact_gamma_pair(g, build_conflict("empty", 12))
    assert a == b
    assert exact_gamma_pair(Graph.complete(4), build_conflict("edge_list", 4, pairs=[(0, 1)])) == (1, 1)
    gg, gh = exact_gamma_pair(Graph.cycle(4), build_conflict("edge_list", 4, pairs=[(0, 1), (2, 3)]))
    assert gg == 2 and gh >= 2
    assert exact_domination(graph_minus(Graph.cycle(4), build_conflict("edge_list", 4,
                                                                        pairs=[(0, 1), (2, 3)]))).gamma == 2
