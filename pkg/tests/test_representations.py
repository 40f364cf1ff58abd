import math
from collections import Counter

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minorant.geometry import WalkPath, convex_minorant, face_decomposition, minorant_length
from minorant.increments import Gaussian, Rademacher, Uniform, Zero
from minorant.permutations import CycleCounts, RankedCycles, counts_from_ranked, rank_cycles, sample_cycle_counts
from minorant.representations import (
    eta,
    eta_values,
    geometric_summaries,
    poissonized_sums,
    sample_excess,
    surrogate_rep1,
    surrogate_rep2,
    surrogate_upper_bound,
)
from minorant.stats import ks_two_sample, repeated_ks
from oracles import cycle_type_distribution


def test_zero_law_gives_zero():
    c = sample_cycle_counts(30, 1)
    assert surrogate_rep1(rank_cycles(c), Zero(), 2) == 0.0
    assert surrogate_rep2(c, Zero(), 3) == 0.0
    assert poissonized_sums(100, Zero(), 4) == (0.0, 0.0, 0.0)


def test_single_cycle():
    mpmath.mp.dps = 50
    for x in (-2.5, 0.0, 0.3, 7.0):
        v = surrogate_rep1(RankedCycles(np.array([1])), Gaussian(), block_sums=np.array([x]))
        ref = float(mpmath.sqrt(1 + mpmath.mpf(x) ** 2) - 1)
        assert v == pytest.approx(ref, rel=4e-16, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_rep1_rep2_regrouping_identity(n, seed):
    rng = np.random.default_rng(seed)
    c = sample_cycle_counts(n, rng)
    r = rank_cycles(c)
    s = Gaussian().block_sums(r.lengths, rng)
    # rep2 visits blocks by ascending j; ranked cycles are descending
    assert surrogate_rep1(r, Gaussian(), block_sums=s) == surrogate_rep2(c, Gaussian(), block_sums=s[::-1])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_surrogate_bounds(n, seed):
    rng = np.random.default_rng(seed)
    r = rank_cycles(sample_cycle_counts(n, rng))
    s = Uniform(-1.0, 1.0).block_sums(r.lengths, rng)
    v = surrogate_rep1(r, Uniform(-1.0, 1.0), block_sums=s)
    assert 0.0 <= v <= surrogate_upper_bound(r.lengths, s) * (1 + 1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False), st.integers(1, 10**6))
def test_eta_algebra(s, j):
    e = float(eta_values(s, j))
    assert e >= 0
    assert e <= s * s / (2 * j) * (1 + 1e-12)
    direct = math.sqrt(j * j + s * s) - j
    assert e == pytest.approx(direct, rel=1e-9, abs=1e-9 * j)


def test_eta_examples():
    assert float(eta_values(0.0, 5)) == 0.0
    for seed in range(20):
        assert eta(1, Rademacher(), seed) == pytest.approx(math.sqrt(2) - 1, rel=1e-15)
    with pytest.raises(ValueError):
        eta(0, Gaussian())


def test_eta_gaussian_large_j_near_half():
    j = 10**4
    s = Gaussian().block_sums(np.full(200_000, j), np.random.default_rng(5))
    m = eta_values(s, j).mean()
    assert 0.45 <= m <= 0.55


def test_poissonized_ordering():
    rng = np.random.default_rng(6)
    for _ in range(300):
        v, w, wp = poissonized_sums(200, Gaussian(), rng)
        assert v >= w >= 0 and wp >= w


def test_mean_w_prime_exact():
    # E W'_n = sum_j P(P_j = 1) sigma^2 / 2 = (1/2) sum_j e^(-1/j) / j
    n, N = 10_000, 20_000
    rng = np.random.default_rng(7)
    x = np.array([poissonized_sums(n, Gaussian(), rng)[2] for _ in range(N)])
    j = np.arange(1, n + 1)
    target = 0.5 * math.fsum(np.exp(-1.0 / j) / j)
    assert abs(x.mean() - target) <= 5 * x.std(ddof=1) / math.sqrt(N)


def test_scalar_surrogates_match_geometry():
    # scalar API (not the batch pipeline) against direct walks, Uniform, n=6
    rng = np.random.default_rng(8)
    law, n, N = Uniform(-1.0, 1.0), 6, 20_000
    a = np.array([surrogate_rep1(rank_cycles(sample_cycle_counts(n, rng)), law, rng) for _ in range(N)])
    b = np.array([surrogate_rep2(sample_cycle_counts(n, rng, "split"), law, rng) for _ in range(N)])
    g = sample_excess(law, n, N, rng, "geometric")
    assert ks_two_sample(a, g).passed and ks_two_sample(b, g).passed


@pytest.mark.parametrize("law", [Gaussian(), Uniform(-1.0, 1.0), Rademacher()], ids=lambda l: l.label())
def test_three_pipelines_agree_n3(law):
    n, N = 3, 100_000

    def draw(method, seed):
        x = sample_excess(law, n, N, seed, method)
        return np.round(x, 9)

    for a, b in (("geometric", "rep1"), ("geometric", "rep2"), ("rep1", "rep2")):
        res = repeated_ks(lambda s: ks_two_sample(draw(a, s), draw(b, s + 1)), 11)
        assert res.passed, (a, b, res.results)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_rademacher_rep1_vs_geometric(n):
    N = 100_000
    res = repeated_ks(
        lambda s: ks_two_sample(np.round(sample_excess(Rademacher(), n, N, s, "rep1"), 9), np.round(sample_excess(Rademacher(), n, N, s + 7, "geometric"), 9)),
        n,
    )
    assert res.passed


def test_gaussian_rep2_vs_geometric_n10():
    N = 100_000
    res = repeated_ks(lambda s: ks_two_sample(sample_excess(Gaussian(), 10, N, s, "rep2"), sample_excess(Gaussian(), 10, N, s + 1, "geometric")), 12)
    assert res.passed


def test_face_lengths_follow_cycle_law_n6():
    from scipy import stats as sps

    n, N = 6, 60_000
    exact = cycle_type_distribution(n)
    incr = np.random.default_rng(13).standard_normal((N, n))
    cnt = Counter()
    for row in incr:
        p = WalkPath.from_increments(row)
        cnt[tuple(face_decomposition(convex_minorant(p), n).face_lengths.tolist())] += 1
    keys = sorted(exact)
    obs = np.array([cnt.get(k, 0) for k in keys], dtype=float)
    assert obs.sum() == N
    assert sps.chisquare(obs, np.array([float(exact[k]) * N for k in keys])).pvalue > 0.01


def test_geometric_summaries_columns():
    rng = np.random.default_rng(14)
    s = geometric_summaries(Gaussian(), 12, 5, rng)
    rng = np.random.default_rng(14)
    x = Gaussian().sample(rng, (5, 12))
    for i in range(5):
        assert s[i, 0] == pytest.approx(minorant_length(WalkPath.from_increments(x[i])), rel=1e-14)
    assert np.allclose(s[:, 2], x.sum(axis=1))


def test_counts_round_trip_through_representation():
    c = CycleCounts(5, np.array([0, 2, 0, 1, 0, 0]))
    assert np.array_equal(counts_from_ranked(rank_cycles(c)).counts, c.counts)
