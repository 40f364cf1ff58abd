"""Convex minorant and concave majorant of a finite walk path.

The interpolated path t -> S(t) has its vertices at the lattice abscissae
0, 1, ..., n, so both hulls are determined by the n + 1 points (k, S_k) and
every hull vertex has an integer abscissa.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class WalkPath:
    """Partial sums (S_0, ..., S_n) of a walk with S_0 = 0."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.shape[0] < 2:
            raise ValueError("a walk path needs at least one step (n >= 1)")
        if v[0] != 0:
            raise ValueError("walk paths start at S_0 = 0")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    @classmethod
    def from_increments(cls, increments) -> "WalkPath":
        incr = np.asarray(increments)
        values = np.zeros(incr.shape[0] + 1, dtype=incr.dtype if incr.dtype.kind in "iu" else np.float64)
        np.cumsum(incr, out=values[1:])
        return cls(values)

    def negate(self) -> "WalkPath":
        return WalkPath(-self.values)

    @property
    def is_integer_valued(self) -> bool:
        return self.values.dtype.kind in "iu"


@dataclass(frozen=True)
class PolyLine:
    """Vertices of a piecewise linear function, abscissae strictly increasing."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs)
        ys = np.asarray(self.ys)
        if xs.shape != ys.shape or xs.ndim != 1 or xs.shape[0] < 2:
            raise ValueError("a polyline needs matching abscissae/ordinates with >= 2 vertices")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("polyline abscissae must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def vertices(self) -> list[tuple]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.ys) / np.diff(self.xs)

    def negate(self) -> "PolyLine":
        return PolyLine(self.xs, -self.ys)

    def __call__(self, t):
        """Evaluate the polyline at abscissa(e) ``t`` by linear interpolation."""
        return np.interp(t, self.xs, self.ys)

    def __eq__(self, other):
        if not isinstance(other, PolyLine):
            return NotImplemented
        return (
            self.xs.shape == other.xs.shape
            and bool(np.array_equal(self.xs, other.xs))
            and bool(np.array_equal(self.ys, other.ys))
        )

    __hash__ = None


@dataclass(frozen=True)
class FaceDecomposition:
    face_lengths: np.ndarray  # horizontal lengths, nonincreasing

    @property
    def face_count(self) -> int:
        return int(self.face_lengths.shape[0])


def convex_minorant(path: WalkPath) -> PolyLine:
    """Largest convex function below the linearly interpolated path.

    Collinear vertices are merged, so consecutive face slopes strictly
    increase. Integer-valued paths are handled in exact integer arithmetic;
    real-valued paths compare cross products in floating point without an
    epsilon (exact ties merge).
    """
    if not isinstance(path, WalkPath):
        path = WalkPath(path)
    idx = _kernels.lower_hull_indices(path.values)
    return PolyLine(idx, path.values[idx])


def concave_majorant(path: WalkPath) -> PolyLine:
    """Least concave function above the path: minus the minorant of minus the path."""
    if not isinstance(path, WalkPath):
        path = WalkPath(path)
    return convex_minorant(path.negate()).negate()


def polyline_length(p: PolyLine) -> float:
    """Euclidean length of the polyline (pairwise summation over segments)."""
    dx = np.diff(p.xs).astype(np.float64)
    dy = np.diff(p.ys).astype(np.float64)
    return float(np.sum(np.sqrt(dx * dx + dy * dy)))


def face_decomposition(p: PolyLine, n: int | None = None) -> FaceDecomposition:
    xs = p.xs
    if xs.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(xs, 1), 0)):
            raise ValueError("non-integer vertex abscissa: polyline is not a walk hull")
        xs = xs.astype(np.int64)
    lengths = np.sort(np.diff(xs))[::-1].copy()
    if n is not None and int(lengths.sum()) != n:
        raise ValueError(f"faces cover {int(lengths.sum())} units, expected n={n}")
    return FaceDecomposition(lengths)


def path_extremes(path: WalkPath) -> tuple[float, float, int, int]:
    """(M_n, m_n, tau_n, kappa_n): max, min and the first indices attaining them."""
    if not isinstance(path, WalkPath):
        path = WalkPath(path)
    v = path.values
    tau = int(np.argmax(v))
    kappa = int(np.argmin(v))
    return v[tau].item(), v[kappa].item(), tau, kappa


def perimeter(path: WalkPath) -> float:
    """Perimeter of the convex hull of {(k, S_k)}: minorant plus majorant length."""
    return polyline_length(convex_minorant(path)) + polyline_length(concave_majorant(path))


def minorant_length(path: WalkPath) -> float:
    return polyline_length(convex_minorant(path))


def majorant_length(path: WalkPath) -> float:
    return polyline_length(concave_majorant(path))


def walk_summaries(increments) -> np.ndarray:
    """Batch version for many paths at once.

    ``increments`` has one walk per row. Returns an array with columns
    (L_min, L_maj, S_n, M_n, m_n). Integer increments are summed exactly.
    """
    incr = np.asarray(increments)
    if incr.ndim == 1:
        incr = incr[None, :]
    if incr.dtype.kind in "iub":
        values = np.zeros((incr.shape[0], incr.shape[1] + 1), dtype=np.int64)
        np.cumsum(incr, axis=1, out=values[:, 1:])
        return _kernels.int_walk_summary(values)
    return _kernels.walk_summary(incr)
