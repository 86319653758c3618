from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from vconn.terminals import (
    AffinePlaneFamily,
    HashFunction,
    SetId,
    build_family,
    is_prime,
    next_prime,
    planted_capture_rate,
    set_members,
    sets_for_pair,
)


def slow_is_prime(x):
    return x >= 2 and all(x % d for d in range(2, int(x**0.5) + 1))


def test_next_prime_examples():
    assert next_prime(10) == 11
    assert next_prime(11) == 13
    assert next_prime(2) == 3
    assert next_prime(1) == 2


def test_is_prime_matches_trial_division():
    assert [x for x in range(2000) if is_prime(x)] == [x for x in range(2000) if slow_is_prime(x)]
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_family_shapes():
    fam = build_family(10, 2, 0)
    assert (fam.p0, fam.p, fam.r) == (11, 5, 3)
    assert fam.num_sets == fam.h_count * 25
    assert fam.set_sizes().max() <= 6
    fam = build_family(4, 1, 0)
    assert (fam.p0, fam.p, fam.r) == (5, 3, 2)
    assert fam.set_sizes().max() <= 4
    with pytest.raises(ValueError):
        build_family(3, 4, 0)
    with pytest.raises(ValueError):
        build_family(3, 0, 0)


def test_hand_arithmetic_line():
    fam = AffinePlaneFamily(11, 2, 11, 5, [HashFunction(0, 1, 0, 11)])
    assert sets_for_pair(fam, 0, 7) == [SetId(0, 2, 0)]
    assert {0, 7} <= set(set_members(fam, SetId(0, 2, 0)))


def test_row_collision_gives_nothing():
    # identity hash, p=5: 0..4 all sit in row 0
    fam = AffinePlaneFamily(5, 2, 5, 5, [HashFunction(0, 1, 0, 5), HashFunction(0, 2, 1, 5)])
    assert sets_for_pair(fam, 1, 3) == []
    with pytest.raises(ValueError):
        sets_for_pair(fam, 2, 2)


def test_degenerate_hash_rejected():
    with pytest.raises(ValueError):
        HashFunction(0, 0, 3, 7)
    fam = build_family(30, 3, 1)
    assert all(not (h.a == 0 and h.b == 0) for h in fam.hashes)
    assert fam.set_sizes().max() < 30


def test_out_of_range_set_id():
    fam = build_family(10, 2, 0)
    with pytest.raises(ValueError):
        set_members(fam, SetId(fam.h_count, 0, 0))
    with pytest.raises(ValueError):
        set_members(fam, SetId(0, 5, 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 120), st.integers(1, 8), st.integers(0, 2**32))
def test_membership_load_and_coverage(n, k, seed):
    k = min(k, n)
    fam = build_family(n, k, seed)
    assert fam.set_sizes().max() <= 2 * fam.r
    assert fam.set_sizes().sum() == fam.h_count * fam.p * n
    rng = np.random.default_rng(seed)
    for idx in rng.integers(0, fam.num_sets, size=10).tolist():
        sid = fam.set_id(idx)
        h = fam.hashes[sid.hash]
        mem = set(set_members(fam, sid))
        on_line = {x for x in range(n) if (int(h(x)) % fam.p - sid.j - sid.s * (int(h(x)) // fam.p)) % fam.p == 0}
        assert mem == on_line
    if n >= 2:
        for _ in range(10):
            u, v = rng.choice(n, 2, replace=False).tolist()
            for sid in sets_for_pair(fam, u, v):
                assert {u, v} <= set(set_members(fam, sid))


def test_three_wise_uniformity_chi_square():
    p0 = 5
    rng = np.random.default_rng(9)
    draws = 60000
    a, b, c = (rng.integers(0, p0, draws) for _ in range(3))
    xs = np.array([0, 1, 3])
    vals = (a[:, None] * xs**2 + b[:, None] * xs + c[:, None]) % p0
    cells = vals[:, 0] * p0 * p0 + vals[:, 1] * p0 + vals[:, 2]
    counts = np.bincount(cells, minlength=p0**3)
    assert chisquare(counts).pvalue > 1e-3


def test_capture_rate_planted_cut():
    assert planted_capture_rate(200, 4, 1000, 0) >= 0.25
