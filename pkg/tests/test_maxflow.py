from __future__ import annotations

import itertools

import numpy as np
import pytest

from vconn.graph import Graph, gnp
from vconn.maxflow import (
    ClampedResultError,
    FlowNetwork,
    all_pairs_vertex_connectivity,
    disjoint_paths,
    edge_connectivity,
    element_connectivity,
    max_flow,
    min_source_side,
    min_vertex_cut,
    split_network,
)

from _brute import element_conn, kappa, lam, removal_disconnects

K4 = Graph(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
PATH3 = Graph(3, [(0, 1), (1, 2)])


def test_single_arc_and_disconnected():
    net = FlowNetwork(2, 0, 1)
    net.add_arc(0, 1, 1)
    assert max_flow(net).value == 1
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, 1)
    res = max_flow(net)
    assert res.value == 0 and not res.clamped
    assert res.reachable.tolist() == [True, True, False]


def test_limit_clamps():
    net = FlowNetwork(5, 0, 4)
    for mid in (1, 2, 3):
        net.add_arc(0, mid, 1)
        net.add_arc(mid, 4, 1)
    res = max_flow(net, limit=2)
    assert res.value == 2 and res.clamped and res.cut is None
    with pytest.raises(ClampedResultError):
        min_source_side(net, res)
    assert max_flow(net, limit=4).value == 3


def test_network_validation():
    net = FlowNetwork(2)
    with pytest.raises(ValueError):
        net.add_arc(0, 1, -1)
    with pytest.raises(ValueError):
        net.add_arc(0, 2, 1)
    net.add_arc(0, 1, 1)
    with pytest.raises(ValueError):
        max_flow(net)
    with pytest.raises(ValueError):
        max_flow(net.with_terminals(0, 0))


def test_path_and_k4_cuts():
    val, cut = min_vertex_cut(PATH3, 0, 2)
    assert val == 1 and cut.vertices == {1} and not cut.edges
    val, cut = min_vertex_cut(K4, 0, 1)
    assert val == 3 and len(cut.vertices) == 2 and len(cut.edges) == 1
    (e,) = cut.edges
    assert set(K4.edges[e].tolist()) == {0, 1}
    with pytest.raises(ValueError):
        min_vertex_cut(K4, 2, 2)


def test_element_connectivity_examples():
    val, cut = element_connectivity(PATH3, {0, 2}, 0, 2)
    assert val == 1 and cut.vertices == {1}
    with pytest.raises(ValueError):
        element_connectivity(PATH3, {0, 2}, 0, 1)


def test_min_source_side_examples():
    net = split_network(PATH3, {0, 2}, [0], [2])
    assert min_source_side(net, max_flow(net)) == {0}
    # two triangles sharing c=2: {0,1,2} and {2,3,4}
    bowtie = Graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])
    net = split_network(bowtie, {0, 4}, [0], [4])
    assert min_source_side(net, max_flow(net)) == {0, 1}
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    net = split_network(star, {1, 2}, [1], [2])
    assert min_source_side(net, max_flow(net)) == {1}


def _bowtie_all_min_cuts():
    bowtie = Graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])
    # every minimum 0-4 cut, enumerated; the minimal source side is the
    # intersection of all their source components
    sides = []
    for c in (1, 2, 3):
        for cut in itertools.combinations([1, 2, 3], c):
            h = bowtie.remove(cut)
            if not h.connected(0, 4):
                comp = h.components()
                sides.append((c, {x for x in range(5) if comp[x] == comp[0]}))
        if sides:
            break
    return sides


def test_bowtie_minimal_side_matches_enumeration():
    sides = _bowtie_all_min_cuts()
    assert set.intersection(*[s for _, s in sides]) == {0, 1}


@pytest.mark.parametrize("seed", range(3))
def test_random_vertex_cuts_match_reference(seed):
    g = gnp(20, 0.3, np.random.default_rng(seed))
    for u, v in itertools.combinations(range(g.n), 2):
        val, cut = min_vertex_cut(g, u, v)
        assert val == kappa(g, u, v)
        assert len(cut) == val
        assert removal_disconnects(g, cut.vertices, cut.edges, u, v)
        assert not ({u, v} & cut.vertices)


@pytest.mark.parametrize("seed", range(3))
def test_menger_path_decomposition(seed):
    g = gnp(16, 0.35, np.random.default_rng(10 + seed))
    for u, v in itertools.combinations(range(g.n), 2):
        net = split_network(g, {u, v}, [u], [v])
        res = max_flow(net)
        paths = disjoint_paths(net, res)
        assert len(paths) == res.value
        inner = [x // 2 for p in paths for x in p[1:-1] if x % 2 == 0]
        inner = [x for x in inner if x not in (u, v)]
        assert len(inner) == len(set(inner))


@pytest.mark.parametrize("seed", range(3))
def test_terminals_everywhere_is_edge_connectivity(seed):
    g = gnp(14, 0.3, np.random.default_rng(20 + seed))
    every = range(g.n)
    for u, v in itertools.combinations(range(g.n), 2):
        e = element_connectivity(g, every, u, v)[0]
        assert e == edge_connectivity(g, u, v) == lam(g, u, v)


@pytest.mark.parametrize("seed", range(3))
def test_element_connectivity_reference_and_monotone(seed):
    rng = np.random.default_rng(30 + seed)
    g = gnp(14, 0.3, rng)
    for u, v in itertools.combinations(range(g.n), 2):
        extra = rng.choice(g.n, size=4, replace=False).tolist()
        u_set = {u, v, *extra}
        e, cut = element_connectivity(g, u_set, u, v)
        assert e == element_conn(g, u_set, u, v)
        assert e >= kappa(g, u, v)
        assert not (cut.vertices & u_set)
        assert removal_disconnects(g, cut.vertices, cut.edges, u, v)
        assert element_connectivity(g, {u, v}, u, v)[0] == kappa(g, u, v)


def test_all_pairs_matrix():
    g = gnp(15, 0.3, np.random.default_rng(7))
    mat = all_pairs_vertex_connectivity(g, 4)
    for u, v in itertools.combinations(range(g.n), 2):
        assert mat[u, v] == mat[v, u] == min(kappa(g, u, v), 4)
