import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robudom.graph import (ConflictGraph, Graph, GraphSpec, VertexSet, build_conflict, gen_bernoulli, graph_minus,
                           is_dominating, parse_conflict, resample_vertex_edges, stats)


def test_spec_validation():
    with pytest.raises(ValueError):
        GraphSpec(5, 1.5, 0)
    with pytest.raises(ValueError):
        GraphSpec(-1, 0.5, 0)


def test_extreme_p():
    assert gen_bernoulli(GraphSpec(5, 0.0, 3)).edge_count == 0
    k5 = gen_bernoulli(GraphSpec(5, 1.0, 3))
    assert k5.edge_count == 10 and k5 == Graph.complete(5)


def test_same_spec_same_graph():
    a = gen_bernoulli(GraphSpec(300, 0.1, 42))
    b = gen_bernoulli(GraphSpec(300, 0.1, 42))
    c = gen_bernoulli(GraphSpec(300, 0.1, 43))
    assert a == b and a.digest() == b.digest()
    assert a != c


@given(st.integers(2, 200), st.floats(0, 1), st.integers(0, 2**63))
@settings(max_examples=60, deadline=None)
def test_dense_and_sparse_storage_agree(n, p, seed):
    d = gen_bernoulli(GraphSpec(n, p, seed), dense=True)
    s = gen_bernoulli(GraphSpec(n, p, seed), dense=False)
    assert d.is_dense and not s.is_dense
    assert d == s
    assert np.array_equal(d.degrees(), s.degrees())
    ip, ix = d.adjacency()
    jp, jx = s.adjacency()
    assert np.array_equal(ip, jp) and np.array_equal(ix, jx)


@pytest.mark.slow
def test_edge_count_mean_matches_binomial():
    # mean of 10 000 counts against 249 750, within 4 standard errors of the mean
    counts = np.array([gen_bernoulli(GraphSpec(1000, 0.5, s)).edge_count for s in range(10_000)])
    sd = math.sqrt(499_500 * 0.25)
    assert abs(counts.mean() - 249_750) <= 4 * sd / math.sqrt(len(counts))
    assert counts.std() == pytest.approx(sd, rel=0.05)


def test_sparse_edge_frequency():
    n, p = 20_000, 1e-4
    g = gen_bernoulli(GraphSpec(n, p, 9))
    pairs = n * (n - 1) / 2
    assert abs(g.edge_count - pairs * p) <= 4 * math.sqrt(pairs * p * (1 - p))


def test_text_round_trip():
    g = gen_bernoulli(GraphSpec(50, 0.2, 5))
    h = Graph.from_text(g.to_text())
    assert h == g and h.digest() == g.digest()
    assert Graph.empty(5).to_text() == "5 0\n"
    with pytest.raises(ValueError):
        Graph.from_text("3 2\n0 1\n")


def test_from_edges_rejects_bad_pairs():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])


def test_conflict_builders():
    e = build_conflict("empty", 10)
    assert (e.m, e.delta) == (0, 0)
    s = build_conflict("star", 10, delta=4)
    assert (s.m, s.delta) == (4, 4) and s.degrees()[0] == 4
    m = build_conflict("matching", 10, m=3)
    assert (m.m, m.delta) == (3, 1)
    r = build_conflict("random_regular", 12, d=3, seed=7)
    assert np.all(r.degrees() == 3) and r.m == 18
    assert build_conflict("random_regular", 12, d=3, seed=7).graph == r.graph
    el = build_conflict("edge_list", 5, pairs=[(0, 1), (3, 4)])
    assert el.m == 2
    with pytest.raises(ValueError):
        build_conflict("random_regular", 7, d=3)
    with pytest.raises(ValueError):
        build_conflict("star", 5, delta=5)
    with pytest.raises(ValueError):
        build_conflict("wheel", 5)


def test_parse_conflict(tmp_path):
    assert parse_conflict("empty", 8).m == 0
    assert parse_conflict("star:3", 8).delta == 3
    assert parse_conflict("matching:2", 8).m == 2
    assert parse_conflict("regular:2:5", 8).m == 8
    path = tmp_path / "h.edges"
    path.write_text("8 1\n2 5\n")
    assert parse_conflict(f"edges:{path}", 8).graph.has_edge(2, 5)
    with pytest.raises(ValueError):
        parse_conflict("bogus", 8)


def test_graph_minus():
    k5 = Graph.complete(5)
    assert graph_minus(k5, build_conflict("empty", 5)) == k5
    assert graph_minus(k5, ConflictGraph(k5, "edge_list")).edge_count == 0
    c4 = Graph.cycle(4)
    out = graph_minus(c4, build_conflict("edge_list", 4, pairs=[(0, 1)]))
    assert out == Graph.from_edges(4, [(1, 2), (2, 3), (0, 3)])
    with pytest.raises(ValueError):
        graph_minus(k5, build_conflict("empty", 6))


@given(st.integers(2, 60), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_graph_minus_is_set_difference(n, p, q, seed):
    g = gen_bernoulli(GraphSpec(n, p, seed))
    h = ConflictGraph(gen_bernoulli(GraphSpec(n, q, seed + 1)), "edge_list")
    out = graph_minus(g, h)
    expected = set(map(tuple, g.edges().tolist())) - set(map(tuple, h.graph.edges().tolist()))
    assert set(map(tuple, out.edges().tolist())) == expected


def test_is_dominating():
    g = gen_bernoulli(GraphSpec(30, 0.1, 1))
    assert is_dominating(g, VertexSet.of(range(30), 30))
    assert not is_dominating(Graph.empty(2), VertexSet.of([0], 2))
    assert is_dominating(Graph.path(3), VertexSet.of([1], 3))
    assert is_dominating(Graph.empty(2), VertexSet.of([], 2), ignore_isolated=True)
    with pytest.raises(ValueError):
        VertexSet.of([3], 3)


def test_stats_examples():
    assert _stats(Graph.empty(4)) == (0, 0, 0, 4)
    assert _stats(Graph.from_edges(2, [(0, 1)])) == (1, 1, 1, 0)
    assert _stats(Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])) == (2, 3, 1, 0)


def _stats(g):
    s = stats(g)
    return (s.max_degree, s.edge_count, s.isolated_edge_count, s.isolated_vertex_count)


def test_resample_extremes():
    g = gen_bernoulli(GraphSpec(20, 0.4, 3))
    iso = resample_vertex_edges(g, 5, 0.0, 1)
    assert len(iso.neighbors(5)) == 0
    full = resample_vertex_edges(g, 5, 1.0, 1)
    assert len(full.neighbors(5)) == 19


def test_resample_keeps_other_edges():
    k4 = Graph.complete(4)
    r = resample_vertex_edges(k4, 2, 0.5, 11)
    kept = {e for e in map(tuple, r.edges().tolist()) if 2 not in e}
    assert kept == {e for e in map(tuple, k4.edges().tolist()) if 2 not in e}


@given(st.integers(3, 80), st.floats(0.05, 0.95), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_resample_only_touches_j(n, p, seed):
    g = gen_bernoulli(GraphSpec(n, p, seed))
    j = seed % n
    r = resample_vertex_edges(g, j, p, seed)
    before = {e for e in map(tuple, g.edges().tolist()) if j not in e}
    after = {e for e in map(tuple, r.edges().tolist()) if j not in e}
    assert before == after
    assert r == resample_vertex_edges(g, j, p, seed)


def test_closed_cover_and_induced():
    p4 = Graph.path(4)
    assert p4.closed_cover([1]).tolist() == [True, True, True, False]
    sub = p4.induced(np.array([1, 2, 3]))
    assert sub == Graph.path(3)
