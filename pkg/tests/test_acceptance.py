"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; they are also repeated in the terminal summary.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from vconn.ghtree import approx_gh_tree, k_gh_tree, verify_gh_tree
from vconn.graph import boundary, gnp, sparsify
from vconn.isolating import isolating_cuts
from vconn.lowerbound import (
    DecompositionError,
    build_codebook,
    build_gadget_graph,
    decode_roundtrip,
    decompose,
    hamming,
    verify_connectivity_formula,
)
from vconn.maxflow import all_pairs_vertex_connectivity
from vconn.oracle import OracleFormatError, build_oracle, deserialize, query, serialize, vconn, vcut
from vconn.terminals import build_family, planted_capture_rate, sets_for_pair, set_members

from _brute import brute_isolating, element_conn, mask_to_set, random_independent
from _report import record

# ---------------------------------------------------------------------------
# 1 and 7: oracle exactness and query budget share one suite

COMBOS = list(itertools.product((20, 40, 60), (0.1, 0.3), (2, 4, 6)))


@pytest.fixture(scope="module")
def oracle_suite():
    t0 = time.perf_counter()
    out = []
    for i in range(100):
        n, p, k = COMBOS[i % len(COMBOS)]
        g = gnp(n, p, np.random.default_rng([1, i]))
        o = build_oracle(g, k, i)
        truth = all_pairs_vertex_connectivity(g, k)
        wrong = unsound = 0
        max_queries = max_steps = 0
        over_budget = 0
        step_bound = 2 * math.ceil(math.log2(n))
        for u in range(n):
            for v in range(u + 1, n):
                info = query(o, u, v)
                wrong += info.value != truth[u, v]
                unsound += any(e < truth[u, v] for e in info.estimates)
                max_queries = max(max_queries, info.bottleneck_queries)
                max_steps = max(max_steps, info.max_lift_steps)
                over_budget += info.bottleneck_queries > o.h_count or info.max_lift_steps > step_bound
        out.append(dict(seed=i, n=n, p=p, k=k, wrong=wrong, unsound=unsound, over=over_budget,
                        queries=max_queries, steps=max_steps, h=o.h_count, bound=step_bound))
    return out, time.perf_counter() - t0


def test_criterion_1_oracle_exactness(oracle_suite):
    rows, seconds = oracle_suite
    exact = sum(r["wrong"] == 0 for r in rows)
    sound = sum(r["unsound"] == 0 for r in rows)
    ok = exact >= 95 and sound == 100 and seconds < 300
    failing = [(r["seed"], r["wrong"]) for r in rows if r["wrong"]]
    record("1", ok, f"exact in {exact}/100 seeds, sound in {sound}/100, {seconds:.0f}s; inexact seeds {failing}")
    assert ok


def test_criterion_7_query_budget(oracle_suite):
    rows, _ = oracle_suite
    over = sum(r["over"] for r in rows)
    worst_q = max(r["queries"] - r["h"] for r in rows)
    worst_s = max(r["steps"] - r["bound"] for r in rows)
    record("7", over == 0, f"{over} queries over budget; max slack used: queries {worst_q:+d}, steps {worst_s:+d}")
    assert over == 0


# ---------------------------------------------------------------------------
# 2 and 3: Gomory-Hu trees


def _tree_instance(seed: int):
    rng = np.random.default_rng([2, seed])
    n = int(rng.integers(8, 41))
    g = gnp(n, float(rng.uniform(0.1, 0.35)), rng)
    size = int(rng.integers(2, min(12, n) + 1))
    u = sorted(rng.choice(n, size=size, replace=False).tolist())
    return g, u, rng


def _edge_sides(tree):
    adj = tree.adjacency()
    sides = []
    for e, (a, b) in enumerate(tree.edges.tolist()):
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            for y, f in adj[x]:
                if f != e and y not in seen:
                    seen.add(y)
                    stack.append(y)
        sides.append(seen)
    return sides


def test_criterion_2_k_gh_tree():
    t0 = time.perf_counter()
    bad = []
    for seed in range(50):
        g, u, rng = _tree_instance(seed)
        k = int(rng.integers(1, 6))
        tree = k_gh_tree(g, u, k, rng)
        # flow equivalency against networkx element connectivity
        for a, b in itertools.combinations(u, 2):
            truth = min(element_conn(g, u, a, b), k)
            bn = tree.bottleneck(a, b)
            got = k if bn is None else bn[0]
            if got != truth:
                bad.append((seed, "flow", a, b))
        # cut equivalency
        sides = _edge_sides(tree)
        for e, cut in enumerate(tree.cuts):
            if len(cut) != tree.weights[e]:
                bad.append((seed, "size", e))
            comp = g.remove(cut.vertices, cut.edges).components()
            left = [x for x in u if tree.f[x] in sides[e]]
            right = [x for x in u if tree.f[x] not in sides[e]]
            if any(comp[x] == comp[y] for x in left for y in right):
                bad.append((seed, "cut", e))
        if verify_gh_tree(g, u, tree):
            bad.append((seed, "verify"))
    seconds = time.perf_counter() - t0
    ok = not bad and seconds < 120
    record("2", ok, f"{len(bad)} violations over 50 instances, {seconds:.0f}s")
    assert ok, bad[:5]


def test_criterion_3_approx_gh_tree():
    t0 = time.perf_counter()
    bad = []
    for seed in range(50):
        g, u, rng = _tree_instance(seed)
        tree, _ = approx_gh_tree(g, u, (), 0.5, rng)
        for a, b in itertools.combinations(u, 2):
            truth = element_conn(g, u, a, b)
            bn = tree.bottleneck(a, b)
            if bn is None or not truth <= bn[0] <= 1.5 * truth:
                bad.append((seed, a, b, truth, bn))
    seconds = time.perf_counter() - t0
    ok = not bad and seconds < 120
    record("3", ok, f"{len(bad)} pairs outside [kappa', 1.5 kappa'] over 50 instances, {seconds:.0f}s")
    assert ok, bad[:5]


# ---------------------------------------------------------------------------
# 4: isolating cuts


def test_criterion_4_isolating_cuts():
    t0 = time.perf_counter()
    checked = 0
    bad = []
    for seed in range(200):
        rng = np.random.default_rng([4, seed])
        n = int(rng.integers(4, 17))
        g = gnp(n, float(rng.uniform(0.15, 0.5)), rng)
        pool = random_independent(g, int(rng.integers(2, 8)), rng)
        if pool is None:
            continue
        cut_at = int(rng.integers(2, len(pool) + 1))
        i_set, f_set = pool[:cut_at], pool[cut_at:]
        limit = int(rng.integers(0, n + 1))
        res = isolating_cuts(g, i_set, f_set, limit)
        checked += 1
        if res.flow_calls > math.ceil(math.log2(len(i_set))) + len(i_set):
            bad.append((seed, "calls"))
        blocked = set(i_set) | set(f_set)
        for v in i_set:
            want = brute_isolating(g, i_set, f_set, v)
            got = res[v]
            if want is None or want[0] > limit:
                if got is not None:
                    bad.append((seed, v, "should clamp"))
                continue
            if got is None or (got.size, len(got.side)) != want[:2] or got.side != mask_to_set(want[2]):
                bad.append((seed, v, "optimum"))
                continue
            # condition (i): S holds exactly one terminal and the cut avoids I and F
            if got.side & set(i_set) != {v} or got.boundary & blocked or boundary(g, got.side) != set(got.boundary):
                bad.append((seed, v, "condition"))
    seconds = time.perf_counter() - t0
    ok = not bad and seconds < 120
    record("4", ok, f"{checked} instances with n <= 16 checked, {len(bad)} violations, {seconds:.1f}s")
    assert ok, bad[:5]


# ---------------------------------------------------------------------------
# 5: terminal family


def test_criterion_5_terminal_family():
    load_bad = 0
    cover_bad = 0
    for n, k in [(10, 2), (4, 1), (50, 3), (200, 4), (300, 7), (64, 10)]:
        fam = build_family(n, k, np.random.default_rng([5, n, k]))
        bound = 2 * math.ceil(fam.p0 / fam.p)
        load_bad += int(fam.set_sizes().max() > bound)
        rng = np.random.default_rng([5, 1, n, k])
        for _ in range(300):
            u, v = rng.choice(n, size=2, replace=False).tolist()
            for sid in sets_for_pair(fam, u, v):
                mem = set(set_members(fam, sid))
                cover_bad += u not in mem or v not in mem
    rate = planted_capture_rate(200, 4, 1000, np.random.default_rng(5))
    ok = load_bad == 0 and cover_bad == 0 and rate >= 0.25
    record("5", ok, f"load violations {load_bad}, coverage violations {cover_bad}, capture rate {rate:.3f}")
    assert ok


# ---------------------------------------------------------------------------
# 6: lower-bound gadget at the stated constants


def _criterion_6_parts(c: int, fill: str):
    """(a, b, c, d) results and details for one decomposition setting."""
    details = []
    n = 48
    cb = build_codebook(n, 64, 6)
    max_c, close = 0, 0
    try:
        for i in range(cb.count):
            d = decompose(cb.words[i], c, None, [6, i], fill=fill)
            max_c = max(max_c, int(d.cmat.max()))
            close += hamming(d.decoded(), cb.words[i]) < n * n / 6
    except DecompositionError as exc:
        details.append(f"n=48 decomposition failed: {exc}")
        a_ok = b_ok = False
    else:
        a_ok = max_c <= 2.1 * n
        b_ok = close >= 0.9 * cb.count
        details.append(f"max C {max_c} vs 2.1n={2.1 * n:.1f}; {close}/{cb.count} within n^2/6")
    n = 24
    cb24 = build_codebook(n, 8, 7)
    try:
        d = decompose(cb24.words[0], c, None, 8, fill=fill)
        rng = np.random.default_rng(9)
        rep = verify_connectivity_formula(build_gadget_graph(d), d, rng.integers(0, n, size=(20, 2)))
        c_ok = rep.match_rate >= 0.9
        details.append(f"formula match {rep.match_rate:.2f}")
        decoded = sum(decode_roundtrip(cb24, i, [10, i], c=c, fill=fill, mode="kappa").success for i in range(8))
        d_ok = decoded == 8
        details.append(f"decoded {decoded}/8")
    except DecompositionError as exc:
        details.append(f"n=24 decomposition failed: {exc}")
        c_ok = d_ok = False
    return (a_ok, b_ok, c_ok, d_ok), details


@pytest.mark.xfail(
    strict=True,
    reason="at c=8 only about 2% of indices are eligible, far fewer than the 4n - r each row of A needs, "
    "and E[C(i,j) | T(i,j)=1] >= 2n + 4 sqrt(n) exceeds 2.1n for n < 1600",
)
def test_criterion_6_lower_bound_gadget():
    t0 = time.perf_counter()
    parts, details = _criterion_6_parts(8, "eligible")
    seconds = time.perf_counter() - t0
    flags = " ".join(f"({x}){'ok' if p else 'fail'}" for x, p in zip("abcd", parts))
    ok = all(parts) and seconds < 600
    record("6", ok, f"c=8 strict eligibility: {flags}; " + "; ".join(details) + f"; {seconds:.0f}s")
    assert ok


def test_criterion_6_supplementary_topup():
    """Same checks with rows of A topped up by best agreement (documented deviation)."""
    out = {}
    for c in (8, 12):
        parts, details = _criterion_6_parts(c, "topup")
        out[c] = parts
        flags = " ".join(f"({x}){'ok' if p else 'fail'}" for x, p in zip("abcd", parts))
        print(f"criterion 6 supplementary, c={c} topup: {flags}; " + "; ".join(details))
    # (b) and (d) survive the top-up at c=8; (c) needs c=12 so z_j has degree above 4n
    assert out[8][1] and out[8][3]
    assert out[12][1] and out[12][2] and out[12][3]
    # (a) cannot hold at this n under any fill
    assert not out[8][0] and not out[12][0]


# ---------------------------------------------------------------------------
# 8: sparsifier


def test_criterion_8_sparsifier():
    bad = 0
    too_many = 0
    for seed in range(30):
        rng = np.random.default_rng([8, seed])
        n = int(rng.integers(5, 41))
        k = int(rng.integers(1, 5))
        g = gnp(n, float(rng.uniform(0.1, 0.6)), rng)
        h = sparsify(g, k)
        too_many += h.m > k * n
        bad += not np.array_equal(all_pairs_vertex_connectivity(g, k), all_pairs_vertex_connectivity(h, k))
    ok = bad == 0 and too_many == 0
    record("8", ok, f"{bad} instances changed some min(kappa, k), {too_many} over k*n edges, 30 instances")
    assert ok


# ---------------------------------------------------------------------------
# 9: serialization


def test_criterion_9_serialization():
    mismatched = 0
    accepted_corrupt = 0
    for seed in range(100):
        rng = np.random.default_rng([9, seed])
        n = int(rng.integers(3, 19))
        k = int(rng.integers(1, min(4, n) + 1))
        g = gnp(n, float(rng.uniform(0.05, 0.5)), rng)
        cuts = bool(rng.integers(0, 2))
        o = build_oracle(g, k, seed, store_cuts=cuts)
        data = serialize(o)
        o2 = deserialize(data)
        for u, v in itertools.combinations(range(n), 2):
            if vconn(o, u, v) != vconn(o2, u, v) or (cuts and vcut(o, u, v) != vcut(o2, u, v)):
                mismatched += 1
        bad = bytearray(data)
        pos = int(rng.integers(0, len(bad)))
        bad[pos] ^= 1 << int(rng.integers(0, 8))
        for blob in (bytes(bad), data[: int(rng.integers(0, len(data)))]):
            try:
                deserialize(blob)
                accepted_corrupt += 1
            except OracleFormatError:
                pass
    ok = mismatched == 0 and accepted_corrupt == 0
    record("9", ok, f"{mismatched} answers changed over 100 round trips, {accepted_corrupt} corrupted files accepted")
    assert ok
