"""Samplers for the limit laws of the minorant length.

* T1: finite variance, centered. (L_n - centering) / sqrt(log n) -> N(0, 3 sigma^4 / 4).
* T2: alpha in (1, 2), centered. (n / a_n^2)(L_n - n) -> 1/2 sum_k S_k(Z_k)^2 / Z_k
  over Poisson-Dirichlet(1) atoms Z_k, sampled through self-similarity
  S(Z) = Z^(1/alpha) S(1).
* T3: alpha in (0, 1). (L_n / a_n, majorant / a_n) -> (S(1) - 2 inf S, 2 sup S - S(1)),
  approximated on a random-walk skeleton with exactly stable steps.
* T5: nonzero mean. (L_n - sqrt(1 + mu^2) n) / a_n -> mu / sqrt(1 + mu^2) S(1).
* Critical (symmetric Cauchy): L_n / n -> minorant length of c * Cauchy process on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import permutations as perm
from .geometry import walk_summaries
from .increments import IncrementLaw, stable_rvs, truncated_variance
from .rng import as_generator

_SKELETON_CHUNK = 1 << 21
_T2_CHUNK = 1 << 17


@dataclass(frozen=True)
class LimitSpec:
    theorem: str
    params: dict = field(default_factory=dict)

    _ALLOWED = ("T1", "T2", "T3", "T5", "Critical")

    def __post_init__(self):
        if self.theorem not in self._ALLOWED:
            raise ValueError(f"theorem must be one of {self._ALLOWED}")
        a = self.params.get("alpha")
        if self.theorem == "T2" and not (a is not None and 1 < a < 2):
            raise ValueError("T2 requires alpha in (1, 2)")
        if self.theorem == "T3" and not (a is not None and 0 < a < 1):
            raise ValueError("T3 requires alpha in (0, 1)")
        if self.theorem == "T5" and self.params.get("mu", 0) == 0:
            raise ValueError("T5 requires mu != 0")

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "params": dict(self.params)}


def sample_limit_T1(sigma: float, rng=None, size=None):
    """N(0, 3 sigma^4 / 4)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return as_generator(rng).normal(0.0, math.sqrt(0.75) * sigma * sigma, size)


def t1_variance(sigma: float) -> float:
    return 0.75 * sigma**4


def centering_T1(law: IncrementLaw, n: int) -> tuple[float, float]:
    """(n + sum_{j<=n} sigma_j^2 / (2j), n + sigma^2/2 log n)."""
    j = np.arange(1, n + 1)
    tv = np.asarray(truncated_variance(law, j), dtype=np.float64)
    general = n + math.fsum(tv / (2.0 * j))
    simplified = n + 0.5 * law.variance * math.log(n)
    return general, simplified


def sample_limit_T2(alpha: float, pq=(0.5, 0.5), K: int = perm.DEFAULT_PD_K, tol: float = perm.DEFAULT_PD_TOL, rng=None, size: int = 1, *, weights=None, return_bound: bool = False):
    """1/2 sum_k Z_k^(2/alpha - 1) X_k^2 over PD(1) atoms, X_k stable(alpha, p - q).

    ``weights`` replaces the PD draw by fixed atoms (rows of a 2-D array, or
    one 1-D vector used for every draw); the residual is then 1 - sum.
    The reported bound 1/2 r^(2/alpha - 1) max_k X_k^2 for residual mass r is
    a heuristic size of the neglected tail, not a rigorous bound.
    Large PD draws are processed in row chunks to bound memory.
    """
    if not 1 < alpha < 2:
        raise ValueError("T2 requires alpha in (1, 2)")
    rng = as_generator(rng)
    if weights is None and size > _T2_CHUNK:
        parts = [sample_limit_T2(alpha, pq, K, tol, rng, min(_T2_CHUNK, size - s), return_bound=True) for s in range(0, size, _T2_CHUNK)]
        vals = np.concatenate([p[0] for p in parts])
        return (vals, np.concatenate([p[1] for p in parts])) if return_bound else vals
    p, q = pq
    if weights is None:
        w, resid = perm.sample_pd1_batch(size, K, tol, rng)
    else:
        w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
        if w.shape[0] == 1 and size > 1:
            w = np.repeat(w, size, axis=0)
        resid = np.clip(1.0 - w.sum(axis=1), 0.0, None)
    x = stable_rvs(alpha, p - q, w.shape, rng)
    gamma = 2.0 / alpha - 1.0
    terms = np.where(w > 0, np.power(w, gamma, where=w > 0, out=np.zeros_like(w)) * x * x, 0.0)
    vals = 0.5 * terms.sum(axis=1)
    if return_bound:
        bound = 0.5 * resid**gamma * np.max(x * x, axis=1)
        return vals, bound
    return vals


def _stable_skeleton_stats(alpha, beta, m, size, rng):
    """Rows (endpoint, max incl. 0, min incl. 0) of m-step stable walks scaled by m^(-1/alpha)."""
    out = np.empty((size, 3))
    rows = max(1, _SKELETON_CHUNK // m)
    scale = m ** (-1.0 / alpha)
    for start in range(0, size, rows):
        k = min(rows, size - start)
        s = np.cumsum(stable_rvs(alpha, beta, (k, m), rng), axis=1) * scale
        out[start : start + k, 0] = s[:, -1]
        out[start : start + k, 1] = np.maximum(s.max(axis=1), 0.0)
        out[start : start + k, 2] = np.minimum(s.min(axis=1), 0.0)
    return out


def sample_limit_T3(alpha: float, p: float = 0.5, q: float = 0.5, m: int = 1 << 12, rng=None, size: int = 1):
    """(S(1) - 2 inf S, 2 sup S - S(1)) on an m-step stable skeleton; arrays of ``size``."""
    if not 0 < alpha < 1:
        raise ValueError("T3 requires alpha in (0, 1)")
    st = _stable_skeleton_stats(alpha, p - q, m, size, as_generator(rng))
    return st[:, 0] - 2 * st[:, 2], 2 * st[:, 1] - st[:, 0]


def t3_from_path(values) -> tuple[float, float]:
    """The T3 functional of a given skeleton (S_0 = 0, ..., S_m)."""
    v = np.asarray(values, dtype=np.float64)
    end = v[-1]
    return end - 2 * min(v.min(), 0.0), 2 * max(v.max(), 0.0) - end


def sample_limit_T5(mu: float, stable_alpha: float = 2.0, sigma_or_scale: float = 1.0, rng=None, size=None, beta: float = 0.0):
    """mu / sqrt(1 + mu^2) times S(1); S(1) = N(0, sigma^2) when alpha = 2."""
    if mu == 0:
        raise ValueError("T5 requires mu != 0")
    rng = as_generator(rng)
    if stable_alpha == 2:
        x = rng.normal(0.0, sigma_or_scale, size)
    else:
        x = sigma_or_scale * stable_rvs(stable_alpha, beta, size, rng)
    return mu / math.sqrt(1.0 + mu * mu) * x


def t5_factor(mu: float) -> float:
    return mu / math.sqrt(1.0 + mu * mu)


def sample_limit_critical(c: float = 1.0, m: int = 1 << 12, rng=None, size: int = 1):
    """Minorant length of c * (standard Cauchy walk) on the grid k/m, k = 0..m."""
    if not c > 0 or m < 2:
        raise ValueError("need c > 0 and m >= 2")
    rng = as_generator(rng)
    out = np.empty(size)
    rows = max(1, _SKELETON_CHUNK // m)
    for start in range(0, size, rows):
        k = min(rows, size - start)
        incr = c * stable_rvs(1.0, 0.0, (k, m), rng)
        out[start : start + k] = walk_summaries(incr)[:, 0] / m
    return out
