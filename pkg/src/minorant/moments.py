"""Exact and Monte Carlo moments of the minorant length.

With eta_j = sqrt(j^2 + S_j^2) - j and a_j = E eta_j / j,

    E L_n - n = sum_{j<=n} a_j
    Var L_n   = sum_{j<=n} E eta_j^2 / j  -  sum_{j,k<=n, j+k>n} a_j a_k.

The block statistics are computed by binomial enumeration (Rademacher),
Gauss-Hermite quadrature (Gaussian), or Monte Carlo. Heavy-tailed laws with a
radial form xi = sign * R - offset use a stratified estimator: the number of
"big" radial draws R > t is binomial, the bulk is simulated and a single big
draw is integrated out by quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy import stats as sps

from . import _kernels
from .geometry import walk_summaries
from .increments import Gaussian, IncrementLaw, Rademacher, Zero
from .representations import eta_values
from .rng import as_generator

HERMITE_NODES = 200
HERMITE_MIN_RATIO = 1.5  # sqrt(j) / sigma below which Gaussian moments use adaptive quadrature
QUAD_ERROR = 1e-12  # reported bound for quadrature/enumeration tables
_MC_CHUNK = 1 << 21  # increments per Monte Carlo chunk
RADEMACHER_SERIES_FROM = 4096
_SERIES_TERMS = 8


def g(x):
    """x^2/2 - sqrt(1 + x^2) + 1, evaluated as (x^2 / (1 + sqrt(1 + x^2)))^2 / 2."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("g is defined for x >= 0")
    u = x * (x / (1.0 + np.hypot(1.0, x)))
    out = 0.5 * u * u
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EtaMoments:
    j: int
    mean: float
    second: float
    g_mean: float  # E g(|S_j| / j)
    method: str
    error_bound: float


@dataclass(frozen=True)
class EtaTable:
    """E eta_j, E eta_j^2 and E g(|S_j|/j) for j = 1..nmax (index j-1)."""

    mean: np.ndarray
    second: np.ndarray
    g_mean: np.ndarray
    error: np.ndarray
    method: str

    @property
    def nmax(self) -> int:
        return int(self.mean.shape[0])

    def row(self, j: int) -> EtaMoments:
        return EtaMoments(j, float(self.mean[j - 1]), float(self.second[j - 1]), float(self.g_mean[j - 1]), self.method, float(self.error[j - 1]))


# ---------------------------------------------------------------------------
# Exact tables
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4)
def _hermite():
    z, w = np.polynomial.hermite_e.hermegauss(HERMITE_NODES)
    return z, w / math.sqrt(2 * math.pi)


def _gaussian_table(law: Gaussian, nmax: int) -> EtaTable:
    z, w = _hermite()
    mean = np.empty(nmax)
    second = np.empty(nmax)
    gm = np.empty(nmax)
    step = max(1, (1 << 20) // HERMITE_NODES)
    for lo in range(1, nmax + 1, step):
        j = np.arange(lo, min(nmax, lo + step - 1) + 1, dtype=np.float64)[:, None]
        s = law.mu * j + law.sigma_ * np.sqrt(j) * z[None, :]
        e = eta_values(s, j)
        sl = slice(lo - 1, lo - 1 + j.shape[0])
        mean[sl] = e @ w
        second[sl] = (e * e) @ w
        gm[sl] = g(np.abs(s) / j) @ w
    # Hermite loses accuracy when the branch points +-ij of sqrt(j^2 + s^2) sit
    # within about one standard deviation sigma sqrt(j); redo those j adaptively
    for jj in range(1, min(nmax, math.ceil((HERMITE_MIN_RATIO * law.sigma_) ** 2)) + 1):
        mean[jj - 1], second[jj - 1] = _gaussian_adaptive(law, jj)
        gm[jj - 1] = second[jj - 1] / (2.0 * jj * jj)
    return EtaTable(mean, second, gm, np.full(nmax, QUAD_ERROR), "quadrature")


def _gaussian_adaptive(law: Gaussian, j: int) -> tuple[float, float]:
    m, sd = law.mu * j, law.sigma_ * math.sqrt(j)

    def moment(p):
        f = lambda z: (math.hypot(j, m + sd * z) - j) ** p * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        return integrate.quad(f, -40.0, 40.0, points=[0.0, -m / sd], epsabs=0, epsrel=1e-13, limit=400)[0]

    return moment(1), moment(2)


def _rademacher_even_moments(j, terms):
    """E S_j^(2k), k = 0..terms, for a Rademacher walk, from the cumulants of log cosh.

    ``j`` may be an array; the result then has shape (terms + 1, len(j)).
    """
    # log cosh t = sum c_k t^(2k)
    c = [0.5, -1 / 12, 1 / 45, -17 / 2520, 31 / 14175, -691 / 467775, 5461 / 6081075, -929569 / 638512875]
    j = np.asarray(j, dtype=np.float64)
    kappa = [np.zeros_like(j) for _ in range(2 * terms + 1)]
    for k in range(1, terms + 1):
        kappa[2 * k] = math.factorial(2 * k) * c[k - 1] * j
    m = [np.ones_like(j)] + [None] * (2 * terms)
    for r in range(1, 2 * terms + 1):
        m[r] = sum(math.comb(r - 1, i - 1) * kappa[i] * m[r - i] for i in range(2, r + 1, 2))
    return np.stack(m[0::2])


def _rademacher_series(j) -> np.ndarray:
    """Rows (E eta_j, E eta_j^2, E g) from the even-power series of sqrt(1 + x^2) - 1.

    |S_j| / j < 1 except on an event of probability 2^(1-j), and the first
    omitted term is O(j^-terms) relative, so for large j this is exact to
    double precision.
    """
    j = np.atleast_1d(np.asarray(j, dtype=np.float64))
    mu = _rademacher_even_moments(j, _SERIES_TERMS)
    k = np.arange(1, _SERIES_TERMS + 1)
    b = np.array([math.comb(2 * i, i) * (-1) ** (i + 1) / ((2 * i - 1) * 4.0**i) for i in k])  # binom(1/2, k)
    ex = mu[1:] / j[None, :] ** (2 * k[:, None])
    u = b @ ex  # E (sqrt(1 + x^2) - 1)
    u2 = (-2.0 * b[1:]) @ ex[1:]  # E (sqrt(1 + x^2) - 1)^2
    return np.stack([j * u, j * j * u2, 0.5 * u2], axis=1)


def _rademacher_table(nmax: int) -> EtaTable:
    head = min(nmax, RADEMACHER_SERIES_FROM)
    t = _kernels.binomial_eta_table(head)
    if nmax > head:
        tail = _rademacher_series(np.arange(head + 1, nmax + 1))
        t = np.concatenate([t, tail])
    return EtaTable(t[:, 0].copy(), t[:, 1].copy(), t[:, 2].copy(), np.full(nmax, QUAD_ERROR), "enumeration")


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def _stats_of(s, j):
    s = np.asarray(s, dtype=np.float64)
    e = eta_values(s, j)
    return np.stack([e, e * e, g(np.abs(s) / j), s * s / (2.0 * j)])


def _plain_mc(law, j, samples, rng):
    h = _stats_of(law.block_sums(np.full(samples, j), rng), j)
    return h.mean(axis=1), h.std(axis=1, ddof=1) / math.sqrt(samples)


def _below(law, t, rng, size):
    """Increments conditioned on R <= t."""
    pi = float(law.radial_sf(t))
    r = law.radial_isf(pi + (1.0 - pi) * (1.0 - rng.random(size)))
    sign = np.where(rng.random(size) < law.plus_prob, 1.0, -1.0)
    return sign * r - law.offset


def _above(law, t, rng, size):
    pi = float(law.radial_sf(t))
    r = law.radial_isf(pi * (1.0 - rng.random(size)))
    sign = np.where(rng.random(size) < law.plus_prob, 1.0, -1.0)
    return sign * r - law.offset


@lru_cache(maxsize=4)
def _legendre(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _sum_rows(x, rows, cols):
    return x.reshape(rows, cols).sum(axis=1) if cols else np.zeros(rows)


def _stratified_mc(law, j, samples, rng, nodes=96, big_rate=0.05):
    """Stratify on N = #{i : R_i > t} with j P(R > t) = big_rate."""
    t = float(law.radial_isf(min(1.0, big_rate / j)))
    pi = float(law.radial_sf(t))
    p0 = (1.0 - pi) ** j
    p1 = j * pi * (1.0 - pi) ** (j - 1)
    p2 = max(0.0, 1.0 - p0 - p1) if j >= 2 else 0.0
    z, wz = _legendre(nodes)
    q = pi * np.exp(1.0 - 1.0 / z)
    r = law.radial_isf(np.maximum(q, 1e-250))
    dens = np.exp(1.0 - 1.0 / z) / (z * z) * wz  # dq/dz / pi
    if p2 > 0:
        mvals = np.arange(2, min(j, 40) + 1)
        pm = sps.binom.pmf(mvals, j, pi)
        pm = pm / pm.sum()
    rows = max(1, _MC_CHUNK // j)
    parts = []
    for start in range(0, samples, rows):
        k = min(rows, samples - start)
        # N = 0: all draws below t
        h0 = _stats_of(_sum_rows(_below(law, t, rng, k * j), k, j), j)
        # N = 1: bulk of j-1 draws, the big draw integrated by quadrature in
        # z with q = pi * exp(1 - 1/z), which flattens the R^2 growth of the integrand
        bulk = _sum_rows(_below(law, t, rng, k * (j - 1)), k, j - 1)
        h1 = np.zeros((4, k))
        for sign, prob in ((1.0, law.plus_prob), (-1.0, 1.0 - law.plus_prob)):
            if prob == 0:
                continue
            sj = bulk[:, None] + (sign * r - law.offset)[None, :]
            h1 += prob * np.einsum("kij,j->ki", _stats_of(sj, j), dens)
        # N >= 2: number of big draws from the conditional binomial
        if p2 > 0:
            m = rng.choice(mvals, size=k, p=pm)
            s2 = np.empty(k)
            for mm in np.unique(m):
                idx = np.nonzero(m == mm)[0]
                c = idx.size
                s2[idx] = _sum_rows(_below(law, t, rng, c * (j - mm)), c, j - mm) + _sum_rows(_above(law, t, rng, c * mm), c, mm)
            h2 = _stats_of(s2, j)
        else:
            h2 = np.zeros((4, k))
        parts.append((h0, h1, h2))
    h0, h1, h2 = (np.concatenate([p[i] for p in parts], axis=1) for i in range(3))
    est = p0 * h0.mean(axis=1) + p1 * h1.mean(axis=1) + p2 * h2.mean(axis=1)
    ddof = 1 if samples > 1 else 0
    var = (p0**2 * h0.var(axis=1, ddof=ddof) + p1**2 * h1.var(axis=1, ddof=ddof) + p2**2 * h2.var(axis=1, ddof=ddof)) / samples
    return est, np.sqrt(var)


def _mc_moments(law, j, samples, rng):
    if hasattr(law, "radial_isf") and j >= 1:
        est, se = _stratified_mc(law, j, samples, rng)
    else:
        est, se = _plain_mc(law, j, samples, rng)
    if math.isfinite(law.variance):
        # control variate: eta = S^2/(2j) - j g(|S|/j) pointwise and E S_j^2 is known,
        # while j g(|S|/j) has far smaller variance than eta in the bulk
        est[0] = 0.5 * (law.variance + j * law.mean**2) - j * est[2]
        se[0] = j * se[2]
    return est, se


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def eta_moments(law: IncrementLaw, j: int, *, samples: int = 100_000, rng=None) -> EtaMoments:
    if j < 1:
        raise ValueError("j must be >= 1")
    if isinstance(law, (Gaussian, Rademacher, Zero)):
        return eta_table(law, j).row(j)
    est, se = _mc_moments(law, j, samples, as_generator(rng))
    return EtaMoments(j, float(est[0]), float(est[1]), float(est[2]), "monte_carlo", float(5 * se[:3].max()))


def eta_table(law: IncrementLaw, nmax: int, *, samples: int = 20_000, rng=None, exact_upto: int = 64, per_octave: int = 4, budget: int = 1 << 24, min_samples: int = 64) -> EtaTable:
    """Block moments for j = 1..nmax.

    Exact for Rademacher, Gaussian and the zero law. Otherwise Monte Carlo at
    every j <= ``exact_upto`` and on a log grid with ``per_octave`` points
    beyond, log-log interpolated in between (method ``monte_carlo``).
    Each grid point uses at most ``budget`` increments, so large j gets fewer
    (but never under ``min_samples``) samples.
    """
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    if isinstance(law, Rademacher):
        return _rademacher_table(nmax)
    if isinstance(law, Gaussian):
        return _gaussian_table(law, nmax)
    if isinstance(law, Zero):
        z = np.zeros(nmax)
        return EtaTable(z, z.copy(), z.copy(), z.copy(), "exact")
    rng = as_generator(rng)
    js = list(range(1, min(nmax, exact_upto) + 1))
    if nmax > exact_upto:
        grid = np.unique(np.round(np.exp2(np.arange(math.log2(exact_upto), math.log2(nmax), 1.0 / per_octave))).astype(int))
        js += [int(v) for v in grid if v > exact_upto] + [nmax]
        js = sorted(set(js))
    est = np.empty((len(js), 3))
    err = np.empty(len(js))
    for i, j in enumerate(js):
        e, se = _mc_moments(law, j, max(min_samples, min(samples, budget // j)), rng)
        est[i] = e[:3]
        err[i] = 5 * se[:3].max()
    jj = np.arange(1, nmax + 1)
    cols = []
    for c in range(3):
        v = np.maximum(est[:, c], 1e-300)
        cols.append(np.exp(np.interp(np.log(jj), np.log(js), np.log(v))))
    return EtaTable(cols[0], cols[1], cols[2], np.interp(jj, js, err), "monte_carlo")


def mean_length(law: IncrementLaw, n: int, table: EtaTable | None = None, **kw) -> float:
    """n + sum_{j<=n} E eta_j / j."""
    t = table if table is not None else eta_table(law, n, **kw)
    j = np.arange(1, n + 1)
    return n + math.fsum(t.mean[:n] / j)


def variance_length(law: IncrementLaw, n: int, table: EtaTable | None = None, **kw) -> float:
    """sum E eta_j^2 / j - sum_{j+k>n} a_j a_k with a_j = E eta_j / j."""
    t = table if table is not None else eta_table(law, n, **kw)
    j = np.arange(1, n + 1)
    first = math.fsum(t.second[:n] / j)
    return first - correction_term(t, n)


def correction_term(t: EtaTable, n: int) -> float:
    """sum over 1 <= j, k <= n with j + k > n of a_j a_k (diagonal included)."""
    a = t.mean[:n] / np.arange(1, n + 1)
    prefix = np.concatenate([[0.0], np.cumsum(a)])
    j = np.arange(1, n + 1)
    # for fixed j, k runs over n-j+1..n
    return math.fsum(a * (prefix[n] - prefix[n - j]))


def mean_and_variance_curve(law: IncrementLaw, ns, **kw) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of L_n on a grid of n from one shared table."""
    ns = np.asarray(ns, dtype=np.int64)
    t = eta_table(law, int(ns.max()), **kw)
    return (
        np.array([mean_length(law, int(n), t) for n in ns]),
        np.array([variance_length(law, int(n), t) for n in ns]),
    )


def variance_lower_bound(law: IncrementLaw, n: int) -> float:
    """0.02 n^3 P(|xi| >= 2n)."""
    return 0.02 * n**3 * float(law.tail(2.0 * n))


def lipschitz_check(law: IncrementLaw, i: int, j: int, *, samples: int = 100_000, rng=None) -> tuple[float, float, float]:
    """(lhs, rhs, stderr): MC E|eta_i - eta_j| on one walk, and (2 + E|xi|) |i - j|."""
    if i < 1 or j < 1:
        raise ValueError("i, j must be >= 1")
    rhs = (2.0 + law.abs_mean) * abs(i - j)
    if i == j:
        return 0.0, rhs, 0.0
    rng = as_generator(rng)
    lo, hi = sorted((i, j))
    sj = law.block_sums(np.full(samples, lo), rng).astype(np.float64)
    si = sj + law.block_sums(np.full(samples, hi - lo), rng)
    d = np.abs(eta_values(si, hi) - eta_values(sj, lo))
    return float(d.mean()), rhs, float(d.std(ddof=1) / math.sqrt(samples))


# ---------------------------------------------------------------------------
# Enumeration oracle over all paths of a finite-support law
# ---------------------------------------------------------------------------


def enumerate_length_moments(n: int, support=(-1, 1), probs=None) -> tuple[float, float]:
    """Exact (E L_n, Var L_n) by enumerating every path of ``len(support)**n``."""
    support = np.asarray(support, dtype=np.int64)
    m = support.size
    probs = np.full(m, 1.0 / m) if probs is None else np.asarray(probs, dtype=np.float64)
    total = m**n
    if total > 1 << 22:
        raise ValueError("enumeration too large")
    digits = (np.arange(total)[:, None] // (m ** np.arange(n))[None, :]) % m
    lengths = walk_summaries(support[digits])[:, 0]
    w = np.prod(probs[digits], axis=1)
    mean = math.fsum(w * lengths)
    var = math.fsum(w * (lengths - mean) ** 2)
    return mean, var


# ---------------------------------------------------------------------------
# CSV table
# ---------------------------------------------------------------------------


def moment_rows(law: IncrementLaw, ns, table: EtaTable | None = None, **kw) -> list[dict]:
    rows = []
    ns = sorted(int(n) for n in ns)
    t = table if table is not None else eta_table(law, ns[-1], **kw)
    for n in ns:
        for qty, val in (("mean_length", mean_length(law, n, t)), ("variance_length", variance_length(law, n, t))):
            rows.append({"law": law.label(), "n": n, "quantity": qty, "value": val, "method": t.method, "error_bound": float(t.error[:n].sum())})
    for j in range(1, min(ns[-1], 50) + 1):
        r = t.row(j)
        for qty, val in (("eta_mean", r.mean), ("eta_second", r.second), ("g_mean", r.g_mean)):
            rows.append({"law": law.label(), "n": j, "quantity": qty, "value": val, "method": r.method, "error_bound": r.error_bound})
    return rows


def write_moment_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["law", "n", "quantity", "value", "method", "error_bound"])
        w.writeheader()
        for r in rows:
            w.writerow({**r, "value": repr(float(r["value"])), "error_bound": repr(float(r["error_bound"]))})
