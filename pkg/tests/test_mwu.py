"""Rank-sum test: exact enumeration, ties, symmetry, approximation."""

import itertools
import math
import random

import pytest
import scipy.stats

from scatterfuzz.mwu import mann_whitney_u


def oracle_exact_p(a, b):
    """Independent enumeration over index subsets, midranks recomputed."""
    pooled = list(a) + list(b)
    n = len(a)

    def u_stat(xs, ys):
        u = 0.0
        for x in xs:
            for y in ys:
                u += 1.0 if x > y else (0.5 if x == y else 0.0)
        return u

    mean = n * len(b) / 2
    d_obs = abs(u_stat(a, b) - mean)
    hits = total = 0
    for combo in itertools.combinations(range(len(pooled)), n):
        chosen = set(combo)
        ga = [pooled[i] for i in combo]
        gb = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        total += 1
        if abs(u_stat(ga, gb) - mean) >= d_obs - 1e-12:
            hits += 1
    return hits / total


def test_separated_samples_exact():
    res = mann_whitney_u([1, 2, 3], [4, 5, 6])
    assert res.u == 0.0
    assert res.p_value == pytest.approx(0.1)
    assert res.method == "exact"
    assert not res.degenerate


def test_tied_groups_exact():
    res = mann_whitney_u([5] * 5, [10] * 5)
    assert res.u == 0.0
    assert res.p_value < 0.05
    assert res.method == "exact"


def test_degenerate_samples():
    res = mann_whitney_u([3, 3], [3, 3, 3])
    assert res.degenerate
    assert res.p_value == 1.0


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        mann_whitney_u([], [1])


def test_symmetry_small():
    a, b = [1, 5, 9], [2, 2, 7, 11]
    ra = mann_whitney_u(a, b)
    rb = mann_whitney_u(b, a)
    assert ra.u + rb.u == pytest.approx(len(a) * len(b))
    assert ra.p_value == pytest.approx(rb.p_value)


def test_exact_matches_oracle_200_random_samples():
    rng = random.Random(99)
    for trial in range(200):
        na = rng.randint(1, 7)
        nb = rng.randint(1, 7)
        a = [rng.randint(0, 6) for _ in range(na)]
        b = [rng.randint(0, 6) for _ in range(nb)]
        res = mann_whitney_u(a, b)
        assert res.method == "exact"
        if res.degenerate:
            assert len(set(a + b)) == 1
            continue
        assert res.p_value == pytest.approx(oracle_exact_p(a, b)), (a, b)
        sym = mann_whitney_u(b, a)
        assert sym.p_value == pytest.approx(res.p_value)
        assert sym.u == pytest.approx(na * nb - res.u)


def test_normal_mode_against_scipy_no_ties():
    rng = random.Random(5)
    for _ in range(20):
        a = rng.sample(range(1000), 12)
        b = rng.sample(range(1000, 2000), 10)
        res = mann_whitney_u(a, b)
        assert res.method == "normal"
        ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided",
                                       method="asymptotic")
        assert res.u == pytest.approx(ref.statistic)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-6)


def test_normal_mode_with_ties_against_scipy():
    rng = random.Random(6)
    for _ in range(20):
        a = [rng.randint(0, 5) for _ in range(15)]
        b = [rng.randint(0, 5) for _ in range(9)]
        if len(set(a + b)) == 1:
            continue
        res = mann_whitney_u(a, b)
        ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided",
                                       method="asymptotic")
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-6)


def test_exact_no_continuity_skew():
    # U at its mean must give p = 1.
    res = mann_whitney_u([1, 4], [2, 3])
    assert res.p_value == 1.0
    assert math.isclose(res.u, 2.0)
