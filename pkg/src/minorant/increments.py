"""Increment laws, walk sampling, normalizing sequences and regime dispatch.

Every law knows how to draw single increments and, vectorized, sums of
``j`` increments (block sums). Laws whose block sums have a closed-form law
(Gaussian, Rademacher, strictly stable, Cauchy) draw them exactly in O(1);
the rest sum fresh increments.

Stable parameterization
-----------------------
Stable draws use the Chambers-Mallows-Stuck transform in the parameterization
whose characteristic function is ``exp(-|t|^a (1 - i b sign(t) tan(pi a / 2)))``
for ``a != 1`` and ``exp(-|t|)`` for the symmetric Cauchy case. With ``a = 2``
this is the normal law with variance 2. For a law in the domain of attraction
with tail weights (p, q) the skewness is ``b = p - q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, ClassVar

import numpy as np
from scipy import integrate, special

from .geometry import WalkPath

_BLOCK_CHUNK = 1 << 22  # increments drawn per chunk when summing blocks by hand


class Regime(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    A_PRIME = "A'"
    B_PRIME = "B'"
    CRITICAL = "critical"


class RegimeError(ValueError):
    """The law is outside every regime with an implemented limit theorem."""


# ---------------------------------------------------------------------------
# Stable sampling
# ---------------------------------------------------------------------------


def stable_rvs(alpha: float, beta: float, size, rng: np.random.Generator) -> np.ndarray:
    """Chambers-Mallows-Stuck draws of a standard strictly stable law.

    Only the symmetric case is supported at ``alpha == 1`` (standard Cauchy);
    for other alpha the law is strictly stable, i.e. a sum of n copies equals
    n**(1/alpha) times one copy in distribution.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"stable index must lie in (0, 2], got {alpha}")
    if not -1.0 <= beta <= 1.0:
        raise ValueError(f"skewness must lie in [-1, 1], got {beta}")
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        if beta != 0.0:
            raise ValueError("asymmetric 1-stable laws are not strictly stable")
        return np.tan(v)
    t = beta * math.tan(0.5 * math.pi * alpha)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (0.5 / alpha)
    av = alpha * (v + b)
    return (
        s
        * np.sin(av)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - av) / w) ** ((1.0 - alpha) / alpha)
    )


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, type] = {}


def _register(cls):
    _REGISTRY[cls.kind] = cls
    return cls


@dataclass(frozen=True)
class IncrementLaw:
    """Base class; concrete laws are frozen dataclasses registered by ``kind``."""

    kind: ClassVar[str] = ""

    # analytic summaries, overridden per law
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def abs_mean(self) -> float:
        raise NotImplementedError

    @property
    def finite_l2log(self) -> bool:
        """Whether E xi^2 log+|xi| is finite."""
        return math.isfinite(self.variance)

    @property
    def finite_third(self) -> bool:
        return math.isfinite(self.variance)

    support_bound: ClassVar[float | None] = None
    integer_valued: ClassVar[bool] = False

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def block_sums(self, lengths, rng: np.random.Generator) -> np.ndarray:
        """Independent draws of S_j, one per entry j of ``lengths``."""
        lengths = np.asarray(lengths, dtype=np.int64)
        return _summed_blocks(self, lengths, rng)

    def tail(self, x) -> np.ndarray:
        """P(|xi| >= x)."""
        raise NotImplementedError(f"{self.kind} has no analytic tail")

    def truncated_moments(self, c: float) -> tuple[float, float]:
        """(E xi 1{|xi| <= c}, E xi^2 1{|xi| <= c})."""
        raise NotImplementedError(f"{self.kind} has no truncated-moment formula")

    def params(self) -> dict:
        return asdict(self)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def label(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.params().items())
        return f"{self.kind}({args})"


def law_from_dict(d: dict) -> IncrementLaw:
    try:
        cls = _REGISTRY[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown law kind {d.get('kind')!r}; known: {sorted(_REGISTRY)}") from None
    return cls(**d.get("params", {}))


def _summed_blocks(law, lengths, rng):
    out = np.empty(lengths.shape[0], dtype=np.int64 if law.integer_valued else np.float64)
    if lengths.size == 0:
        return out
    if np.any(lengths < 0):
        raise ValueError("block lengths must be non-negative")
    start = 0
    while start < lengths.shape[0]:
        stop = start
        total = 0
        while stop < lengths.shape[0] and (total == 0 or total + lengths[stop] <= _BLOCK_CHUNK):
            total += int(lengths[stop])
            stop += 1
        part = lengths[start:stop]
        draws = np.asarray(law.sample(rng, total))
        cs = np.zeros(total + 1, dtype=draws.dtype)
        np.cumsum(draws, out=cs[1:])
        ends = np.cumsum(part)
        out[start:stop] = cs[ends] - cs[ends - part]
        start = stop
    return out


@_register
@dataclass(frozen=True)
class Gaussian(IncrementLaw):
    mu: float = 0.0
    sigma_: float = field(default=1.0, metadata={"name": "sigma"})

    kind: ClassVar[str] = "Gaussian"

    def __init__(self, mu: float = 0.0, sigma: float = 1.0):
        if sigma <= 0:
            raise ValueError("Gaussian scale must be positive")
        object.__setattr__(self, "mu", float(mu))
        object.__setattr__(self, "sigma_", float(sigma))

    def params(self):
        return {"mu": self.mu, "sigma": self.sigma_}

    @property
    def mean(self):
        return self.mu

    @property
    def variance(self):
        return self.sigma_**2

    @property
    def abs_mean(self):
        m, s = self.mu, self.sigma_
        return s * math.sqrt(2 / math.pi) * math.exp(-0.5 * (m / s) ** 2) + m * math.erf(m / (s * math.sqrt(2)))

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma_, size)

    def block_sums(self, lengths, rng):
        lengths = np.asarray(lengths, dtype=np.int64)
        z = rng.standard_normal(lengths.shape[0])
        return self.mu * lengths + self.sigma_ * np.sqrt(lengths) * z

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        m, s = self.mu, self.sigma_
        return special.ndtr((-x - m) / s) + special.ndtr((m - x) / s)

    def truncated_moments(self, c):
        m, s = self.mu, self.sigma_
        a, b = (-c - m) / s, (c - m) / s
        pa, pb = _npdf(a), _npdf(b)
        mass = special.ndtr(b) - special.ndtr(a)
        m1 = m * mass + s * (pa - pb)
        m2 = (m * m + s * s) * mass + 2 * m * s * (pa - pb) + s * s * (a * pa - b * pb)
        return float(m1), float(m2)


def _npdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


@_register
@dataclass(frozen=True)
class Rademacher(IncrementLaw):
    kind: ClassVar[str] = "Rademacher"
    support_bound: ClassVar[float] = 1.0
    integer_valued: ClassVar[bool] = True

    mean = 0.0
    variance = 1.0
    abs_mean = 1.0

    def sample(self, rng, size=None):
        return 2 * rng.integers(0, 2, size, dtype=np.int64) - 1

    def block_sums(self, lengths, rng):
        lengths = np.asarray(lengths, dtype=np.int64)
        return 2 * rng.binomial(lengths, 0.5).astype(np.int64) - lengths

    def tail(self, x):
        return np.where(np.asarray(x, dtype=float) <= 1.0, 1.0, 0.0)

    def truncated_moments(self, c):
        return (0.0, 1.0) if c >= 1.0 else (0.0, 0.0)


@_register
@dataclass(frozen=True)
class Uniform(IncrementLaw):
    lo: float = -1.0
    hi: float = 1.0

    kind: ClassVar[str] = "Uniform"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("Uniform needs lo < hi")

    @property
    def support_bound(self):
        return max(abs(self.lo), abs(self.hi))

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def variance(self):
        return (self.hi - self.lo) ** 2 / 12.0

    @property
    def abs_mean(self):
        lo, hi = self.lo, self.hi
        if lo >= 0:
            return self.mean
        if hi <= 0:
            return -self.mean
        return (lo * lo + hi * hi) / (2 * (hi - lo))

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        w = self.hi - self.lo
        right = np.clip(self.hi - np.maximum(x, self.lo), 0, None)
        left = np.clip(np.minimum(-x, self.hi) - self.lo, 0, None)
        both = np.where(x <= 0, 1.0, (right + left) / w)
        return np.minimum(both, 1.0)

    def truncated_moments(self, c):
        a, b = max(self.lo, -c), min(self.hi, c)
        if b <= a:
            return 0.0, 0.0
        w = self.hi - self.lo
        return (b * b - a * a) / (2 * w), (b**3 - a**3) / (3 * w)


@_register
@dataclass(frozen=True)
class ParetoSymmetricCentered(IncrementLaw):
    """Two-sided Pareto: xi = +R w.p. p, -R w.p. q, with P(R > x) = x^-alpha, x >= 1.

    For alpha > 1 the analytic mean is subtracted so that E xi = 0 exactly;
    ``shift`` then moves the mean away from zero on purpose. For alpha <= 1
    no centering is applied and ``shift`` is a plain location offset.
    """

    alpha: float = 1.5
    p: float = 0.5
    q: float = 0.5
    shift: float = 0.0

    kind: ClassVar[str] = "ParetoSymmetricCentered"

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("tail index must be positive")
        if min(self.p, self.q) < 0 or abs(self.p + self.q - 1.0) > 1e-12:
            raise ValueError("tail weights need p, q >= 0 and p + q = 1")

    @property
    def centering(self) -> float:
        if self.alpha <= 1:
            return 0.0
        return (self.p - self.q) * self.alpha / (self.alpha - 1)

    @property
    def _offset(self) -> float:
        # xi = s R - offset
        return self.centering - self.shift

    @property
    def mean(self):
        return self.shift if self.alpha > 1 else math.nan

    @property
    def variance(self):
        a = self.alpha
        if a <= 2:
            return math.inf
        er = a / (a - 1)
        return a / (a - 2) - ((self.p - self.q) * er) ** 2

    @property
    def abs_mean(self):
        if self.alpha <= 1:
            return math.inf
        val, _ = integrate.quad(lambda x: float(self.tail(x)), 0, math.inf, limit=200)
        return val

    @property
    def finite_l2log(self):
        return self.alpha > 2

    @property
    def finite_third(self):
        return self.alpha > 3

    # radial form xi = sign * R - offset, used by stratified estimators
    @property
    def plus_prob(self) -> float:
        return self.p

    @property
    def offset(self) -> float:
        return self._offset

    def radial_sf(self, r):
        return self._sf_r(r)

    def radial_isf(self, q):
        return np.asarray(q, dtype=float) ** (-1.0 / self.alpha)

    def sample(self, rng, size=None):
        r = self.radial_isf(1.0 - rng.random(size))  # u in (0, 1]
        sign = np.where(rng.random(size) < self.p, 1.0, -1.0)
        return sign * r - self._offset

    def _sf_r(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= 1.0, 1.0, np.abs(r) ** (-self.alpha))

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        off = self._offset
        val = self.p * self._sf_r(x + off) + self.q * self._sf_r(x - off)
        return np.where(x <= 0, 1.0, np.minimum(val, 1.0))

    def truncated_moments(self, c):
        off = self._offset
        a = self.alpha

        def prim(m, r):
            # antiderivative of alpha r^(m - alpha - 1)
            if abs(m - a) < 1e-15:
                return a * math.log(r)
            return a * r ** (m - a) / (m - a)

        def piece(lo, hi, sign):
            # E over R in [lo, hi] of (sign R - off)^k, k = 1, 2
            lo = max(lo, 1.0)
            if hi <= lo:
                return 0.0, 0.0
            i0 = prim(0, hi) - prim(0, lo)
            i1 = prim(1, hi) - prim(1, lo)
            i2 = prim(2, hi) - prim(2, lo)
            m1 = sign * i1 - off * i0
            m2 = i2 - 2 * sign * off * i1 + off * off * i0
            return m1, m2

        # sign +: |r - off| <= c  <=> r in [off - c, off + c]
        p1, p2 = piece(off - c, off + c, 1.0)
        # sign -: |-r - off| <= c <=> r in [-c - off, c - off]
        n1, n2 = piece(-c - off, c - off, -1.0)
        return self.p * p1 + self.q * n1, self.p * p2 + self.q * n2


@_register
@dataclass(frozen=True)
class StableExact(IncrementLaw):
    """Exactly stable increments: shift + scale * X, X from :func:`stable_rvs`."""

    alpha: float = 1.5
    beta: float = 0.0
    scale: float = 1.0
    shift: float = 0.0

    kind: ClassVar[str] = "StableExact"

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError("stable index must lie in (0, 2]")
        if self.alpha == 1 and self.beta != 0:
            raise ValueError("only the symmetric 1-stable law is supported")
        if self.scale <= 0:
            raise ValueError("stable scale must be positive")

    @property
    def mean(self):
        return self.shift if self.alpha > 1 else math.nan

    @property
    def variance(self):
        return 2 * self.scale**2 if self.alpha == 2 else math.inf

    @property
    def abs_mean(self):
        if self.alpha <= 1:
            return math.inf
        if self.alpha == 2:
            return Gaussian(self.shift, math.sqrt(self.variance)).abs_mean
        raise NotImplementedError("E|xi| of a non-Gaussian stable law is not tabulated")

    def sample(self, rng, size=None):
        return self.shift + self.scale * stable_rvs(self.alpha, self.beta, size, rng)

    def block_sums(self, lengths, rng):
        lengths = np.asarray(lengths, dtype=np.int64)
        x = stable_rvs(self.alpha, self.beta, lengths.shape[0], rng)
        return self.shift * lengths + self.scale * lengths ** (1.0 / self.alpha) * x

    def tail(self, x):
        if self.alpha == 2:
            return Gaussian(self.shift, math.sqrt(self.variance)).tail(x)
        return super().tail(x)

    def truncated_moments(self, c):
        if self.alpha == 2:
            return Gaussian(self.shift, math.sqrt(self.variance)).truncated_moments(c)
        return super().truncated_moments(c)


@_register
@dataclass(frozen=True)
class CauchyStandard(IncrementLaw):
    kind: ClassVar[str] = "CauchyStandard"

    mean = math.nan
    variance = math.inf
    abs_mean = math.inf

    def sample(self, rng, size=None):
        return stable_rvs(1.0, 0.0, size, rng)

    def block_sums(self, lengths, rng):
        lengths = np.asarray(lengths, dtype=np.int64)
        return lengths * stable_rvs(1.0, 0.0, lengths.shape[0], rng)

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, 1.0, 1.0 - 2.0 / math.pi * np.arctan(np.abs(x)))


def _lambertw_ge_e(x):
    """Principal Lambert W for x >= e via Newton on w + log w = log x (several times faster than scipy)."""
    lx = np.log(x)
    w = lx - np.log(lx)
    for _ in range(4):
        w = w - (w + np.log(w) - lx) * w / (w + 1.0)
    return w


@_register
@dataclass(frozen=True)
class LogSquaredTail(IncrementLaw):
    """Symmetric law with P(|xi| > x) = x^-2 (1 + log x)^-2 for x >= 1.

    Its density decays like 2 / (x^3 log^2 x): E xi^2 = 3 is finite while
    E xi^2 log+|xi| and E|xi|^3 are infinite.
    """

    kind: ClassVar[str] = "LogSquaredTail"

    mean = 0.0
    variance = 3.0

    @property
    def abs_mean(self):
        val, _ = integrate.quad(lambda x: 1.0 / (x * x * (1 + math.log(x)) ** 2), 1, math.inf)
        return 1.0 + val

    @property
    def finite_l2log(self):
        return False

    @property
    def finite_third(self):
        return False

    plus_prob = 0.5
    offset = 0.0

    def radial_sf(self, r):
        return self.tail(r)

    def radial_isf(self, q):
        # R (1 + log R) = q^(-1/2)  =>  R = y / W(e y)
        y = np.asarray(q, dtype=float) ** -0.5
        return y / _lambertw_ge_e(math.e * y)

    def sample(self, rng, size=None):
        r = self.radial_isf(1.0 - rng.random(size))
        sign = np.where(rng.random(size) < 0.5, 1.0, -1.0)
        return sign * r

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        safe = np.maximum(x, 1.0)
        return np.where(x <= 1.0, 1.0, 1.0 / (safe * safe * (1 + np.log(safe)) ** 2))

    def truncated_moments(self, c):
        if c < 1:
            return 0.0, 0.0
        t = 1.0 / (1.0 + math.log(c))
        return 0.0, 1.0 + 2.0 * (1.0 - t) - t * t


@_register
@dataclass(frozen=True)
class Zero(IncrementLaw):
    """The degenerate law xi = 0."""

    kind: ClassVar[str] = "Zero"
    support_bound: ClassVar[float] = 0.0

    mean = 0.0
    variance = 0.0
    abs_mean = 0.0

    def sample(self, rng, size=None):
        return np.zeros(size) if size is not None else 0.0

    def block_sums(self, lengths, rng):
        return np.zeros(np.asarray(lengths).shape[0])

    def tail(self, x):
        return np.where(np.asarray(x, dtype=float) <= 0, 1.0, 0.0)

    def truncated_moments(self, c):
        return 0.0, 0.0


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def sample_increment(law: IncrementLaw, rng: np.random.Generator) -> float:
    return np.asarray(law.sample(rng, 1))[0].item()


def sample_walk(law: IncrementLaw, n: int, rng: np.random.Generator) -> WalkPath:
    if n < 1:
        raise ValueError("a walk needs n >= 1 steps")
    return WalkPath.from_increments(np.asarray(law.sample(rng, n)))


@dataclass(frozen=True)
class NormalizationPlan:
    a: Callable[[np.ndarray], np.ndarray]
    index: float  # regular-variation index 1/alpha
    notes: str = ""
    exact: bool = False  # whether S_n / a_n has the limit law for every n

    def __call__(self, n):
        return self.a(np.asarray(n, dtype=float))


def stable_index(law: IncrementLaw) -> float:
    if isinstance(law, (ParetoSymmetricCentered, StableExact)) and law.alpha <= 2:
        if isinstance(law, ParetoSymmetricCentered) and law.alpha == 2:
            return 2.0
        return float(law.alpha)
    if isinstance(law, CauchyStandard):
        return 1.0
    return 2.0


def stable_skewness(law: IncrementLaw) -> float:
    """Skewness of the attracting stable law: p - q for tail weights (p, q)."""
    if isinstance(law, ParetoSymmetricCentered):
        return law.p - law.q
    if isinstance(law, StableExact):
        return law.beta
    return 0.0


def normalization(law: IncrementLaw) -> NormalizationPlan:
    if isinstance(law, StableExact):
        if law.alpha == 2:
            s = law.sigma
            return NormalizationPlan(lambda n: s * np.sqrt(n), 0.5, "sigma*sqrt(n); (S_n - n*shift)/a_n is exactly N(0,1)", True)
        sc, a = law.scale, law.alpha
        return NormalizationPlan(
            lambda n: sc * n ** (1.0 / a),
            1.0 / a,
            "scale*n^(1/alpha); strictly stable, S_n/a_n equals one increment in law (CMS parameterization)",
            True,
        )
    if isinstance(law, CauchyStandard):
        return NormalizationPlan(lambda n: n, 1.0, "a_n = n; S_n/n is exactly standard Cauchy", True)
    if isinstance(law, ParetoSymmetricCentered):
        a = law.alpha
        if a > 2:
            s = law.sigma
            return NormalizationPlan(lambda n: s * np.sqrt(n), 0.5, "sigma*sqrt(n)")
        if a == 2:
            raise RegimeError("no normalization implemented for the alpha = 2 Pareto law")
        return NormalizationPlan(
            lambda n: n ** (1.0 / a),
            1.0 / a,
            "quantile recipe inf{t : n P(|xi| > t) <= 1} = n^(1/alpha); scale of the limit is approximate",
        )
    if isinstance(law, Zero):
        raise RegimeError("the degenerate law has no normalization")
    var = law.variance
    if math.isfinite(var) and var > 0:
        s = math.sqrt(var)
        return NormalizationPlan(lambda n: s * np.sqrt(n), 0.5, "sigma*sqrt(n)", isinstance(law, Gaussian))
    raise RegimeError(f"no normalization implemented for {law.label()}")


def truncated_variance(law: IncrementLaw, n) -> float | np.ndarray:
    """Var(xi 1{|xi| <= sqrt(n)}); scalar or elementwise over an array of n."""
    if not math.isfinite(law.variance):
        raise RegimeError(f"{law.label()} has infinite variance; truncated variance is only defined in regime A")
    if isinstance(law, Gaussian) and law.mu == 0:
        ns = np.asarray(n, dtype=float)
        c = np.sqrt(ns) / law.sigma_
        out = law.sigma_**2 * (special.erf(c / math.sqrt(2)) - 2 * c * np.exp(-0.5 * c * c) / math.sqrt(2 * math.pi))
        return float(out) if np.ndim(n) == 0 else out
    if np.ndim(n) == 0:
        m1, m2 = law.truncated_moments(math.sqrt(n))
        return m2 - m1 * m1
    ns = np.asarray(n)
    bound = law.support_bound
    out = np.empty(ns.shape, dtype=float)
    for i, v in enumerate(ns.ravel()):
        if bound is not None and math.sqrt(v) >= bound:
            out.flat[i] = law.variance
        else:
            m1, m2 = law.truncated_moments(math.sqrt(v))
            out.flat[i] = m2 - m1 * m1
    return out


def classify_regime(law: IncrementLaw) -> Regime:
    if isinstance(law, CauchyStandard):
        return Regime.CRITICAL
    if isinstance(law, StableExact):
        a = law.alpha
        if a == 2:
            return Regime.A if law.shift == 0 else Regime.A_PRIME
        if a > 1:
            return Regime.B if law.shift == 0 else Regime.B_PRIME
        if a == 1:
            if law.shift != 0:
                raise RegimeError("uncovered critical case: drifted Cauchy increments")
            return Regime.CRITICAL
        return Regime.C
    if isinstance(law, ParetoSymmetricCentered):
        a = law.alpha
        if a > 2:
            return Regime.A if law.shift == 0 else Regime.A_PRIME
        if a == 2:
            if law.shift != 0:
                return Regime.B_PRIME
            raise RegimeError("uncovered case: centered alpha = 2 law with infinite variance")
        if a > 1:
            return Regime.B if law.shift == 0 else Regime.B_PRIME
        if a == 1:
            if law.p != law.q or law.shift != 0:
                raise RegimeError("uncovered critical case: only symmetric Cauchy-type tails are covered")
            return Regime.CRITICAL
        return Regime.C
    mean = law.mean
    if math.isfinite(law.variance):
        return Regime.A if mean == 0 else Regime.A_PRIME
    raise RegimeError(f"cannot classify {law.label()}")
