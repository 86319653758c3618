from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vconn.graph import Graph, boundary, gnp
from vconn.isolating import isolating_cut_direct, isolating_cuts

from _brute import brute_isolating, mask_to_set, random_independent


def check_condition_i(g, res, i_set, f_set):
    for v, cut in res.cuts.items():
        if cut is None:
            continue
        assert cut.side & set(i_set) == {v}
        assert not (cut.boundary & (set(i_set) | set(f_set)))
        assert boundary(g, cut.side) == set(cut.boundary)
    sides = [c.side for c in res.cuts.values() if c is not None]
    for a in range(len(sides)):
        for b in range(a + 1, len(sides)):
            assert not (sides[a] & sides[b])


def test_star_two_leaves():
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    res = isolating_cuts(star, {1, 2}, set(), limit=5)
    for v in (1, 2):
        assert res[v].side == {v} and res[v].boundary == {0} and res[v].size == 1


def test_forbidden_vertex_pushes_cut_to_subdivision():
    # a-x-s-y-b as 0-1-2-3-4
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    res = isolating_cuts(g, {0, 4}, {2}, limit=3)
    assert res[0].side == {0} and res[0].boundary == {1}
    assert res[4].side == {4} and res[4].boundary == {3}


def test_argument_errors():
    g = Graph(3, [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        isolating_cuts(g, {0}, set(), 2)
    with pytest.raises(ValueError):
        isolating_cuts(g, {0, 1}, set(), 2)
    with pytest.raises(ValueError):
        isolating_cuts(g, {0, 2}, {1}, 2)
    with pytest.raises(ValueError):
        isolating_cuts(g, {0, 2}, {0}, 2)


def test_clamped_marker():
    k = Graph(5, [(0, x) for x in (1, 2, 3)] + [(4, x) for x in (1, 2, 3)])
    res = isolating_cuts(k, {0, 4}, set(), limit=2)
    assert res.clamped(0) and res.clamped(4)
    res = isolating_cuts(k, {0, 4}, set(), limit=3)
    assert res[0].size == 3


def fuzz_instance(seed: int):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 17))
    g = gnp(n, float(rng.uniform(0.2, 0.45)), rng)
    want = int(rng.integers(2, 6))
    pool = random_independent(g, want + int(rng.integers(0, 3)), rng)
    if pool is None or len(pool) < 2:
        return None
    cut = max(2, min(want, len(pool)))
    i_set = pool[:cut]
    f_set = pool[cut:]
    return g, i_set, f_set


@pytest.mark.parametrize("seed", range(40))
def test_matches_exhaustive_enumeration(seed):
    inst = fuzz_instance(seed)
    if inst is None:
        pytest.skip("no independent terminal set")
    g, i_set, f_set = inst
    limit = g.n
    res = isolating_cuts(g, i_set, f_set, limit)
    check_condition_i(g, res, i_set, f_set)
    assert res.flow_calls <= math.ceil(math.log2(len(i_set))) + len(i_set)
    for v in i_set:
        want = brute_isolating(g, i_set, f_set, v)
        got = res[v]
        if want is None:
            assert got is None
            continue
        assert (got.size, len(got.side)) == want[:2]
        assert got.side == mask_to_set(want[2])


def test_random_n16_four_terminals():
    rng = np.random.default_rng(123)
    done = 0
    while done < 5:
        g = gnp(16, 0.35, rng)
        i_set = random_independent(g, 4, rng)
        if i_set is None:
            continue
        res = isolating_cuts(g, i_set, [], 16)
        for v in i_set:
            b = brute_isolating(g, i_set, [], v)
            assert (res[v].size, len(res[v].side)) == b[:2]
        done += 1


@pytest.mark.parametrize("seed", range(6))
def test_single_call_agreement(seed):
    rng = np.random.default_rng(1000 + seed)
    g = gnp(40, 0.12, rng)
    pool = random_independent(g, 9, rng)
    assert pool is not None
    i_set, f_set = pool[:6], pool[6:]
    limit = 6
    res = isolating_cuts(g, i_set, f_set, limit)
    assert res.network_size <= 4 * g.m + 2 * (limit + 1) * len(f_set) + 4 * g.n
    for v in i_set:
        direct = isolating_cut_direct(g, v, set(i_set) - {v}, f_set, limit)
        assert (None if res[v] is None else res[v].size) == direct


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_property_limit_consistency(seed):
    inst = fuzz_instance(seed)
    if inst is None:
        return
    g, i_set, f_set = inst
    full = isolating_cuts(g, i_set, f_set, g.n)
    for limit in (0, 1, 2):
        part = isolating_cuts(g, i_set, f_set, limit)
        for v in i_set:
            if full[v] is not None and full[v].size <= limit:
                assert part[v] == full[v]
            else:
                assert part[v] is None
