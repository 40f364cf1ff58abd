"""Permutation-side surrogates for the excess length L_n - n.

Given the cycle lengths of a uniform permutation of [n] and, independently,
one fresh block sum S_j per cycle of length j, the excess is

    sum over cycles of sqrt(j^2 + S_j^2) - j.

This has the same law as the excess of the convex minorant of the walk; it
holds for discrete increment laws as well. The batch samplers below give the
three pipelines that are compared in the tests: direct geometry ("geometric"),
ranked cycles from the Chinese restaurant ("rep1"), and cycle counts from the
split sampler ("rep2").
"""

from __future__ import annotations

import math

import numpy as np

from . import permutations as perm
from .geometry import walk_summaries
from .increments import IncrementLaw
from .rng import as_generator

_GEOM_CHUNK = 1 << 21  # increments per geometric batch


def eta_values(s, j):
    """sqrt(j^2 + s^2) - j, computed as s^2 / (j + sqrt(j^2 + s^2))."""
    s = np.asarray(s, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    s2 = s * s
    return s2 / (j + np.sqrt(j * j + s2))


def eta(j: int, law: IncrementLaw, rng=None) -> float:
    if j < 1:
        raise ValueError("j must be >= 1")
    rng = as_generator(rng)
    s = law.block_sums(np.array([j]), rng)
    return float(eta_values(s, j)[0])


def surrogate_rep1(cycles: perm.RankedCycles, law: IncrementLaw, rng=None, block_sums=None) -> float:
    """Excess from ranked cycle lengths; ``block_sums`` aligned with ``cycles.lengths``."""
    z = cycles.lengths
    s = law.block_sums(z, as_generator(rng)) if block_sums is None else np.asarray(block_sums)
    if s.shape != z.shape:
        raise ValueError("one block sum per cycle is required")
    return math.fsum(eta_values(s, z))


def surrogate_rep2(counts: perm.CycleCounts, law: IncrementLaw, rng=None, block_sums=None) -> float:
    """Excess grouped by cycle length: blocks ordered by j ascending, K_{n,j} each."""
    j = np.repeat(np.arange(counts.n + 1), counts.counts)
    s = law.block_sums(j, as_generator(rng)) if block_sums is None else np.asarray(block_sums)
    if s.shape != j.shape:
        raise ValueError("one block sum per cycle is required")
    return math.fsum(eta_values(s, j))


def surrogate_upper_bound(lengths, block_sums) -> float:
    """sum S^2 / (2 j), which dominates the surrogate term by term."""
    z = np.asarray(lengths, dtype=np.float64)
    s = np.asarray(block_sums, dtype=np.float64)
    return float(np.sum(s * s / (2 * z)))


def poissonized_sums(n: int, law: IncrementLaw, rng=None) -> tuple[float, float, float]:
    """(V_n, W_n, W'_n) from one shared draw of independent P_j ~ Poisson(1/j).

    V_n sums eta over all P_j blocks of every length j <= n; W_n keeps only the
    lengths with P_j = 1 and W'_n replaces eta there by S^2 / (2j).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(rng)
    j = np.arange(1, n + 1)
    p = rng.poisson(1.0 / j)
    blocks = np.repeat(j, p)
    s = law.block_sums(blocks, rng).astype(np.float64)
    e = eta_values(s, blocks)
    v = math.fsum(e)
    # first block of each length with P_j = 1
    single = np.repeat(p == 1, p)
    w = math.fsum(e[single])
    wp = math.fsum((s[single] ** 2) / (2.0 * blocks[single]))
    return v, w, wp


# ---------------------------------------------------------------------------
# Batch pipelines for L_n - n
# ---------------------------------------------------------------------------


def geometric_summaries(law: IncrementLaw, n: int, size: int, rng=None) -> np.ndarray:
    """Rows (L_min, L_maj, S_n, M_n, m_n) from ``size`` directly simulated walks."""
    rng = as_generator(rng)
    rows = max(1, _GEOM_CHUNK // n)
    out = np.empty((size, 5))
    for start in range(0, size, rows):
        m = min(rows, size - start)
        out[start : start + m] = walk_summaries(law.sample(rng, (m, n)))
    return out


def _block_excess(rows, lengths, size, law, rng):
    s = law.block_sums(lengths, rng).astype(np.float64)
    e = eta_values(s, lengths)
    return np.bincount(rows, weights=e, minlength=size)


def representation_excess(law: IncrementLaw, n: int, size: int, rng=None, method: str = "rep1") -> np.ndarray:
    """``size`` draws of L_n - n from the permutation side.

    ``rep1`` uses Chinese-restaurant cycles, ``rep2`` the split sampler.
    Cycles are drawn in chunks so memory stays bounded for large n.
    """
    rng = as_generator(rng)
    sampler = {"rep1": "crp", "rep2": "split"}[method]
    chunk = size if sampler == "split" else max(1, (1 << 22) // n)
    chunk = min(chunk, 1 << 16)
    out = np.empty(size)
    for start in range(0, size, chunk):
        m = min(chunk, size - start)
        rows, z = perm.sample_cycle_sizes_batch(n, m, rng, method=sampler)
        out[start : start + m] = _block_excess(rows, z, m, law, rng)
    return out


def sample_excess(law: IncrementLaw, n: int, size: int, rng=None, method: str = "geometric") -> np.ndarray:
    """L_n - n by one of the three pipelines: ``geometric``, ``rep1`` or ``rep2``."""
    if method == "geometric":
        return geometric_summaries(law, n, size, rng)[:, 0] - n
    return representation_excess(law, n, size, rng, method)
