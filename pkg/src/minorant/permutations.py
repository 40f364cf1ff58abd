"""Cycle structure of uniform random permutations and its Poisson limits.

Samplers
--------
* Chinese restaurant (default exact sampler, O(n) per permutation).
* "split": the cycle containing the smallest remaining element has a length
  uniform on {1, ..., m} among m remaining elements; O(number of cycles),
  used for very large n.
* Feller coupling: Bernoulli(1/i) indicators; cycle counts K_{n,j} and the
  independent Poisson(1/j) counts P_j are spacings of the same sequence.
* GEM(1) stick breaking for Poisson-Dirichlet(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .rng import as_generator

DEFAULT_PD_K = 64
DEFAULT_PD_TOL = 1e-9
DEFAULT_FELLER_TOL = 1e-6


@dataclass(frozen=True)
class CycleCounts:
    """counts[j] = K_{n,j} for j = 1..n (counts[0] is unused and zero)."""

    n: int
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (self.n + 1,):
            raise ValueError(f"counts must have length n+1={self.n + 1}")
        if np.any(c < 0) or c[0] != 0:
            raise ValueError("counts must be non-negative with counts[0] == 0")
        if int(np.dot(np.arange(self.n + 1), c)) != self.n:
            raise ValueError("sum of j*K_j must equal n")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        """K_n, the number of cycles."""
        return int(self.counts.sum())

    def to_json(self) -> list[int]:
        return self.counts[1:].tolist()


@dataclass(frozen=True)
class RankedCycles:
    lengths: np.ndarray  # nonincreasing

    def __post_init__(self):
        z = np.asarray(self.lengths, dtype=np.int64)
        if z.ndim != 1 or z.size == 0 or np.any(z < 1):
            raise ValueError("ranked cycles need at least one positive length")
        if np.any(np.diff(z) > 0):
            raise ValueError("ranked cycle lengths must be nonincreasing")
        object.__setattr__(self, "lengths", z)

    @property
    def n(self) -> int:
        return int(self.lengths.sum())

    @property
    def count(self) -> int:
        return int(self.lengths.shape[0])


@dataclass(frozen=True)
class PoissonCounts:
    counts: np.ndarray  # counts[j] = P_j for j = 1..n; counts[0] unused


@dataclass(frozen=True)
class PDWeights:
    weights: np.ndarray  # nonincreasing, length <= K
    residual: float

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist(), "residual": self.residual}


# ---------------------------------------------------------------------------
# Cycle counts
# ---------------------------------------------------------------------------


def sample_cycle_counts(n: int, rng=None, method: str = "crp") -> CycleCounts:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(rng)
    if method == "crp":
        sizes = _kernels.crp_cycle_sizes(rng.random(n))
    elif method == "split":
        sizes = _split_sizes(n, rng)
    else:
        raise ValueError(f"unknown cycle sampler {method!r}")
    return CycleCounts(n, np.bincount(sizes, minlength=n + 1))


def _split_sizes(n, rng):
    out = []
    m = n
    while m > 0:
        z = int(rng.integers(1, m + 1))
        out.append(z)
        m -= z
    return np.asarray(out, dtype=np.int64)


def sample_cycle_sizes_batch(n: int, size: int, rng=None, method: str = "crp") -> tuple[np.ndarray, np.ndarray]:
    """Cycle lengths of ``size`` independent uniform permutations of [n].

    Returns flat arrays ``(rows, lengths)``: ``lengths[i]`` is a cycle of
    permutation ``rows[i]``. Rows appear in increasing order.
    """
    rng = as_generator(rng)
    if method == "crp":
        chunk = max(1, (1 << 22) // n)
        rows_parts, len_parts = [], []
        for start in range(0, size, chunk):
            m = min(chunk, size - start)
            r, z = _kernels.crp_cycle_sizes_batch(rng.random((m, n)))
            rows_parts.append(r + start)
            len_parts.append(z)
        return np.concatenate(rows_parts), np.concatenate(len_parts)
    if method == "split":
        rem = np.full(size, n, dtype=np.int64)
        alive = np.arange(size)
        rows_parts, len_parts = [], []
        while alive.size:
            m = rem[alive]
            z = np.minimum((rng.random(alive.size) * m).astype(np.int64) + 1, m)
            rows_parts.append(alive)
            len_parts.append(z)
            rem[alive] = m - z
            alive = alive[rem[alive] > 0]
        rows = np.concatenate(rows_parts)
        lengths = np.concatenate(len_parts)
        order = np.argsort(rows, kind="stable")
        return rows[order], lengths[order]
    raise ValueError(f"unknown cycle sampler {method!r}")


def feller_horizon(n: int, tol: float = DEFAULT_FELLER_TOL) -> int:
    """Indicator horizon H with sum_{i>H} 1/i^2 < 1/H <= tol."""
    return max(n, int(math.ceil(1.0 / tol)))


def sample_feller_batch(n: int, size: int, rng=None, tol: float = DEFAULT_FELLER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Coupled (K_{n,j}, P_j) for ``size`` independent indicator sequences.

    Returns two int arrays of shape (size, n + 1), column j holding the
    j-spacing counts. Positions of ones are generated directly: after a one
    at position l the next one is at floor(l / U) + 1, because
    P(no one in l+1..m) = l / m.
    """
    rng = as_generator(rng)
    horizon = feller_horizon(n, tol)
    k = np.zeros((size, n + 1), dtype=np.int64)
    p = np.zeros((size, n + 1), dtype=np.int64)
    pos = np.ones(size, dtype=np.float64)  # xi_1 = 1 always
    alive = np.arange(size)
    while alive.size:
        cur = pos[alive]
        nxt = np.floor(cur / (1.0 - rng.random(alive.size))) + 1.0
        # K: spacings starting at ones in [1, n], closed by an artificial one at n + 1
        in_n = cur <= n
        if np.any(in_n):
            gap = (np.minimum(nxt[in_n], n + 1) - cur[in_n]).astype(np.int64)
            np.add.at(k, (alive[in_n], gap), 1)
        gap = nxt - cur
        ok = gap <= n
        if np.any(ok):
            np.add.at(p, (alive[ok], gap[ok].astype(np.int64)), 1)
        pos[alive] = nxt
        alive = alive[nxt <= horizon]
    k[:, 0] = 0
    p[:, 0] = 0
    return k, p


def sample_feller_coupled(n: int, rng=None, tol: float = DEFAULT_FELLER_TOL) -> tuple[CycleCounts, PoissonCounts]:
    if n < 1:
        raise ValueError("n must be >= 1")
    k, p = sample_feller_batch(n, 1, rng, tol)
    return CycleCounts(n, k[0]), PoissonCounts(p[0])


def rank_cycles(c: CycleCounts) -> RankedCycles:
    j = np.arange(c.n, 0, -1)
    return RankedCycles(np.repeat(j, c.counts[::-1][:-1]))


def counts_from_ranked(r: RankedCycles) -> CycleCounts:
    n = r.n
    return CycleCounts(n, np.bincount(r.lengths, minlength=n + 1))


# ---------------------------------------------------------------------------
# Poisson-Dirichlet(1)
# ---------------------------------------------------------------------------


def sample_pd1_batch(size: int, K: int = DEFAULT_PD_K, tol: float = DEFAULT_PD_TOL, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """Sorted GEM(1) atoms, shape (size, K) zero-padded, and the residual mass.

    Sticks are broken until the unbroken remainder is below ``tol`` in every
    row; the largest K atoms are kept and everything else (dropped atoms and
    the unbroken stick) is reported as residual.
    """
    if K < 1 or not 0 < tol < 1:
        raise ValueError("need K >= 1 and tol in (0, 1)")
    rng = as_generator(rng)
    rest = np.ones(size)
    cols = []
    while True:
        u = rng.random(size)
        take = np.where(rest >= tol, rest * u, 0.0)
        cols.append(take)
        rest = rest - take
        if not np.any(rest >= tol):
            break
    atoms = np.sort(np.stack(cols, axis=1), axis=1)[:, ::-1]
    if atoms.shape[1] < K:
        atoms = np.hstack([atoms, np.zeros((size, K - atoms.shape[1]))])
    w = np.ascontiguousarray(atoms[:, :K])
    residual = np.clip(1.0 - w.sum(axis=1), 0.0, None)
    return w, residual


def sample_pd1(K: int = DEFAULT_PD_K, tol: float = DEFAULT_PD_TOL, rng=None) -> PDWeights:
    w, r = sample_pd1_batch(1, K, tol, rng)
    row = w[0]
    return PDWeights(row[row > 0].copy(), float(r[0]))


def gem_reference_sorted(size: int, sticks: int, rng=None) -> np.ndarray:
    """Plain GEM(1) with a fixed number of sticks, sorted per row (test oracle path)."""
    rng = as_generator(rng)
    u = rng.random((size, sticks))
    log_keep = np.cumsum(np.log1p(-u), axis=1)
    before = np.exp(np.hstack([np.zeros((size, 1)), log_keep[:, :-1]]))
    return -np.sort(-(before * u), axis=1)


# ---------------------------------------------------------------------------
# Exact quantities
# ---------------------------------------------------------------------------


def exact_count_moments(n: int, j: int, k: int) -> tuple[Fraction, Fraction, Fraction]:
    """(E K_{n,j}, E K_{n,j}(K_{n,j} - 1), E K_{n,j} K_{n,k}) as exact rationals."""
    if not (1 <= j <= n and 1 <= k <= n):
        raise ValueError("need 1 <= j, k <= n")
    if j == k:
        raise ValueError("cross moment needs j != k")
    e = Fraction(1, j)
    ee = Fraction(1, j * j) if 2 * j <= n else Fraction(0)
    cross = Fraction(1, j * k) if j + k <= n else Fraction(0)
    return e, ee, cross


def pd_fractional_part_mean(n: int) -> float:
    """E sum_k {n Z_k} = 1 + sum_{k=1}^{n-1} (1 - k log((k+1)/k)).

    Terms with k > 100 use the alternating series
    1/(2k) - 1/(3k^2) + 1/(4k^3) - ... to avoid cancellation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 1.0
    head = np.arange(1, min(n, 101), dtype=np.float64)
    total += float(np.sum(1.0 - head * np.log1p(1.0 / head)))
    if n > 101:
        k = np.arange(101, n, dtype=np.float64)
        x = 1.0 / k
        terms = np.zeros_like(x)
        for m in range(8, 0, -1):
            # 1 - k log(1 + 1/k) = sum_{m>=1} (-1)^(m+1) x^m / (m+1)
            terms = x * ((-1) ** (m + 1) / (m + 1) + terms)
        total += math.fsum(terms)
    return total
