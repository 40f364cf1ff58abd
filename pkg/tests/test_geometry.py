import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minorant.geometry import (
    PolyLine,
    WalkPath,
    concave_majorant,
    convex_minorant,
    face_decomposition,
    majorant_length,
    minorant_length,
    path_extremes,
    perimeter,
    polyline_length,
    walk_summaries,
)
from oracles import brute_lower_hull, brute_minorant_values

real_paths = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=60).map(
    lambda inc: WalkPath.from_increments(np.array(inc))
)
int_paths = st.lists(st.integers(-5, 5), min_size=1, max_size=60).map(
    lambda inc: WalkPath.from_increments(np.array(inc, dtype=np.int64))
)
any_path = st.one_of(real_paths, int_paths)


# -- examples -----------------------------------------------------------------


def test_affine_path_single_face():
    m = convex_minorant(WalkPath(np.array([0, 1, 2, 3])))
    assert m.vertices == [(0, 0), (3, 3)]
    assert face_decomposition(m, 3).face_lengths.tolist() == [3]


def test_v_shape():
    m = convex_minorant(WalkPath(np.array([0, -1, 0])))
    assert m.vertices == [(0, 0), (1, -1), (2, 0)]
    assert polyline_length(m) == pytest.approx(2 * math.sqrt(2), abs=1e-15)


def test_zigzag_minorant_and_majorant():
    p = WalkPath(np.array([0, 1, -1, 0]))
    assert convex_minorant(p).vertices == [(0, 0), (2, -1), (3, 0)]
    assert concave_majorant(p).vertices == [(0, 0), (1, 1), (3, 0)]
    assert face_decomposition(convex_minorant(p), 3).face_lengths.tolist() == [2, 1]
    assert perimeter(p) == pytest.approx(2 * (math.sqrt(5) + math.sqrt(2)), abs=1e-14)


def test_affine_majorant():
    assert concave_majorant(WalkPath(np.array([0, -1, -2]))).vertices == [(0, 0), (2, -2)]


def test_polyline_lengths():
    assert polyline_length(PolyLine(np.array([0, 3]), np.array([0, 3]))) == pytest.approx(3 * math.sqrt(2), abs=1e-15)
    assert polyline_length(PolyLine(np.array([0, 2, 3]), np.array([0, -1, 0]))) == pytest.approx(math.sqrt(5) + math.sqrt(2), abs=1e-15)


def test_affine_perimeter_counts_hull_twice():
    assert perimeter(WalkPath(np.array([0.0, 1.0, 2.0, 3.0]))) == pytest.approx(6 * math.sqrt(2), abs=1e-14)


def test_face_decomposition_affine_n5():
    fd = face_decomposition(convex_minorant(WalkPath(np.arange(6) * 0.5)), 5)
    assert fd.face_lengths.tolist() == [5] and fd.face_count == 1


def test_face_decomposition_rejects_fractional_abscissae():
    with pytest.raises(ValueError):
        face_decomposition(PolyLine(np.array([0.0, 1.5, 3.0]), np.array([0.0, -1.0, 0.0])))


def test_path_extremes_examples():
    M, m, tau, kappa = path_extremes(WalkPath(np.array([0, 1, 1])))
    assert (M, tau) == (1, 1)
    M, m, tau, kappa = path_extremes(WalkPath(np.array([0, -2, 3])))
    assert (m, kappa, M, tau) == (-2, 1, 3, 2)
    assert path_extremes(WalkPath(np.zeros(5)))[2:] == (0, 0)


def test_malformed_paths_rejected():
    with pytest.raises(ValueError):
        WalkPath(np.array([0.0]))
    with pytest.raises(ValueError):
        WalkPath(np.array([1.0, 2.0]))


# -- exhaustive oracle -----------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7])
def test_matches_bruteforce_hull_exhaustively(n):
    for steps in itertools.product((-1, 0, 1), repeat=n):
        vals = np.concatenate([[0], np.cumsum(steps)]).astype(np.int64)
        assert convex_minorant(WalkPath(vals)).xs.tolist() == brute_lower_hull(vals.tolist())


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=1, max_size=10))
def test_bruteforce_equivalence_values_grid(tail):
    vals = [0] + tail
    m = convex_minorant(WalkPath(np.array(vals, dtype=np.int64)))
    assert m.xs.tolist() == brute_lower_hull(vals)
    # maximality: the minorant equals the chord-minimum at every integer point
    np.testing.assert_allclose(m(np.arange(len(vals))), [float(x) for x in brute_minorant_values(vals)], rtol=0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=1, max_size=10))
def test_bruteforce_equivalence_float_values(tail):
    # dyadic scale keeps the float cross products exact, so collinear ties merge as for integers
    vals = np.array([0] + tail, dtype=np.float64) * 0.375
    assert convex_minorant(WalkPath(vals)).xs.tolist() == brute_lower_hull([0] + tail)


# -- properties ---------------------------------------------------------------------


@settings(max_examples=400, deadline=None)
@given(any_path)
def test_minorant_below_path_and_convex(p):
    m = convex_minorant(p)
    k = np.arange(p.n + 1)
    assert m.xs[0] == 0 and m.xs[-1] == p.n
    assert m.ys[0] == 0 and m.ys[-1] == p.values[-1]
    assert np.all(m.ys == p.values[m.xs])
    # vertices lie on the path, so dominance reduces to the interpolated values
    assert np.all(m(k) <= p.values + 1e-9 * (1 + np.abs(p.values)))
    if m.xs.size > 2:
        dx = np.diff(m.xs)
        dy = np.diff(m.ys).astype(np.float64)
        # strict convexity via cross products, robust to rounding of the slopes
        cross = dx[:-1] * dy[1:] - dx[1:] * dy[:-1]
        assert np.all(cross > 0)


@settings(max_examples=300, deadline=None)
@given(any_path)
def test_majorant_strictly_concave(p):
    M = concave_majorant(p)
    if M.xs.size > 2:
        dx = np.diff(M.xs)
        dy = np.diff(M.ys).astype(np.float64)
        assert np.all(dx[:-1] * dy[1:] - dx[1:] * dy[:-1] < 0)


@settings(max_examples=300, deadline=None)
@given(any_path)
def test_reflection_identity_bit_for_bit(p):
    assert concave_majorant(p) == convex_minorant(p.negate()).negate()


@settings(max_examples=400, deadline=None)
@given(any_path)
def test_sandwich_bounds(p):
    n = p.n
    M, m, _, _ = path_extremes(p)
    s = float(p.values[-1])
    lmaj, lmin = majorant_length(p), minorant_length(p)
    assert 2 * M - s <= lmaj <= 2 * M - s + 2 * n
    assert s - 2 * m <= lmin <= s - 2 * m + 2 * n


@settings(max_examples=300, deadline=None)
@given(any_path)
def test_length_lower_bounds_and_faces(p):
    n = p.n
    m = convex_minorant(p)
    L = polyline_length(m)
    assert L >= max(n, math.hypot(n, float(p.values[-1]))) * (1 - 1e-12)
    assert perimeter(p) >= 2 * n * (1 - 1e-12)
    fd = face_decomposition(m, n)
    assert int(fd.face_lengths.sum()) == n
    assert np.all(np.diff(fd.face_lengths) <= 0)


def test_horizontal_length_equality_iff_flat():
    assert minorant_length(WalkPath(np.zeros(7))) == 6.0
    assert minorant_length(WalkPath(np.array([0.0, 1e-3, 0.0]))) == 2.0
    assert minorant_length(WalkPath(np.array([0.0, -1e-3, 0.0]))) > 2.0


def test_random_paths_dominance_bulk():
    # 10^4 random paths through the batch kernel and the per-path API
    rng = np.random.default_rng(5)
    incr = rng.standard_normal((10_000, 30))
    summ = walk_summaries(incr)
    for i in range(0, 10_000, 97):
        p = WalkPath.from_increments(incr[i])
        assert summ[i, 0] == pytest.approx(minorant_length(p), rel=1e-13)
        assert summ[i, 1] == pytest.approx(majorant_length(p), rel=1e-13)
    vals = np.concatenate([np.zeros((10_000, 1)), np.cumsum(incr, axis=1)], axis=1)
    assert np.allclose(summ[:, 3], vals.max(axis=1)) and np.allclose(summ[:, 4], vals.min(axis=1))
    assert np.all(summ[:, 0] >= summ[:, 2] - 2 * summ[:, 4])


def test_walk_summaries_integer_exact():
    incr = np.array([[1, -1, -1, 1], [1, 1, 1, 1]], dtype=np.int64)
    s = walk_summaries(incr)
    # path 0,1,0,-1,0: minorant (0,0)-(3,-1)-(4,0)
    assert s[0, 0] == pytest.approx(math.sqrt(10) + math.sqrt(2), abs=1e-14)
    assert s[1, 0] == pytest.approx(4 * math.sqrt(2), abs=1e-14)
    assert s[1, 2] == 4
