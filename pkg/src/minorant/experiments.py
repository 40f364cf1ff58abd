"""Configuration-driven experiments, one per limit theorem or moment formula.

Each experiment returns an :class:`ExitReport` holding long-format result rows,
per-criterion verdicts and the raw samples. The CLI writes them to disk.
Every random sample set is generated through :func:`stats.run_replications`
in fixed blocks, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import increments as inc
from . import limits, moments, permutations, representations, stats
from .rng import derive_seed

BLOCK = 5_000  # replications per stream block
EXPERIMENTS = (
    "verify-representation",
    "limit-T1",
    "limit-T2",
    "limit-T3",
    "limit-T5",
    "limit-critical",
    "moments",
    "couplings",
    "variance-growth",
)
STATISTICAL = {"verify-representation", "limit-T1", "limit-T2", "limit-T3", "limit-T5", "limit-critical", "couplings"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    law: dict
    n_grid: list
    replications: int
    seed: int = 0
    output_dir: str = "out"
    ks_level: float = 0.01
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        name = d.get("experiment")
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENTS)}")
        base = dict(DEFAULTS[name])
        base.update({k: v for k, v in d.items() if k != "params"})
        params = dict(DEFAULTS[name].get("params", {}))
        params.update(d.get("params", {}))
        base["params"] = params
        known = {"experiment", "law", "n_grid", "replications", "seed", "output_dir", "ks_level", "params"}
        extra = set(base) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**base)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "law": self.law,
            "n_grid": list(self.n_grid),
            "replications": self.replications,
            "seed": self.seed,
            "ks_level": self.ks_level,
            "params": self.params,
        }

    def validate(self) -> None:
        grid = [int(n) for n in self.n_grid]
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ConfigError("n_grid must be nonempty, positive and strictly increasing")
        self.n_grid = grid
        if self.ks_level != 0.01:
            raise ConfigError("ks_level is fixed at 0.01")
        if self.experiment in STATISTICAL and self.replications < 1000:
            raise ConfigError("statistical experiments need replications >= 1000")
        self.law_obj()  # parse early

    def law_obj(self) -> inc.IncrementLaw:
        try:
            return inc.law_from_dict(self.law)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad law descriptor: {e}") from None


@dataclass
class Criterion:
    name: str
    paper_ref: str
    passed: bool
    statistic: float
    threshold: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_ref": self.paper_ref,
            "pass": bool(self.passed),
            "statistic": _num(self.statistic),
            "threshold": _num(self.threshold),
            "seed": int(self.seed),
        }


@dataclass
class ExitReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    criteria: list = field(default_factory=list)
    samples: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def row(self, law, n, statistic, value, stderr=None, passed=None):
        self.rows.append(
            {
                "experiment": self.config.experiment,
                "law": law,
                "n": int(n),
                "statistic": statistic,
                "value": value,
                "stderr": stderr,
                "pass": passed,
            }
        )

    def criterion(self, name, ref, passed, statistic, threshold, seed):
        c = Criterion(f"{self.config.experiment}/{name}", ref, bool(passed), float(statistic), float(threshold), int(seed))
        self.criteria.append(c)
        return c


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _require(law, allowed, experiment):
    try:
        regime = inc.classify_regime(law)
    except inc.RegimeError as e:
        raise ConfigError(f"{experiment}: {e}") from None
    if regime not in allowed:
        want = "/".join(r.value for r in allowed)
        raise ConfigError(f"regime {regime.value} law for a regime {want} experiment ({law.label()})")
    return regime


def _sample(job: Callable, N: int, seed: int, workers) -> np.ndarray:
    return stats.run_replications(job, N, seed, workers=workers, block_size=BLOCK).values


def _excess_job(law, n, method):
    return lambda rng, k: representations.sample_excess(law, n, k, rng, method)


def _rounded(x, law):
    # discrete laws produce atoms whose float sums differ by an ulp between pipelines
    return np.round(x, 9) if law.integer_valued else x


def _repeat(run, seed, repeats):
    return stats.repeated_ks(run, seed, repeats=repeats, need=repeats // 2 + 1)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _verify_representation(cfg, rep, workers):
    law = cfg.law_obj()
    R = cfg.replications
    repeats = int(cfg.params["repeats"])
    pipelines = ("geometric", "rep1", "rep2")
    pairs = [("geometric", "rep1"), ("geometric", "rep2"), ("rep1", "rep2")]
    for n in cfg.n_grid:
        cache = {}

        def draw(r, which, n=n):
            key = (r, which)
            if key not in cache:
                seed = derive_seed(cfg.seed, "repr", n, which, r)
                cache[key] = _rounded(_sample(_excess_job(law, n, which), R, seed, workers), law)
            return cache[key]

        for a, b in pairs:
            count = {"r": 0}

            def run(sub_seed, a=a, b=b):
                r = count["r"]
                count["r"] += 1
                return stats.ks_two_sample(draw(r, a), draw(r, b))

            res = _repeat(run, cfg.seed, repeats)
            for i, k in enumerate(res.results):
                rep.row(law.label(), n, f"ks_{a}_{b}_repeat{i}", k.statistic, None, k.passed)
            rep.criterion(f"n{n}/{a}_vs_{b}", "permutation representation of the minorant length", res.passed, res.statistic, res.critical, cfg.seed)
        for which in pipelines:
            x = draw(0, which)
            rep.samples[f"{which}_n{n}"] = x
            rep.row(law.label(), n, f"mean_excess_{which}", float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)))


def _limit_T1(cfg, rep, workers):
    law = cfg.law_obj()
    _require(law, {inc.Regime.A}, cfg.experiment)
    sigma = law.sigma
    target = limits.t1_variance(sigma)
    sd = math.sqrt(target)
    method = cfg.params["method"]
    ks_vals = []
    var_last = None
    for n in cfg.n_grid:
        if n < 2:
            raise ConfigError("limit-T1 needs n >= 2 (log n normalization)")
        seed = derive_seed(cfg.seed, "T1", n)
        x = _sample(_excess_job(law, n, method), cfg.replications, seed, workers)
        general, _ = limits.centering_T1(law, n)
        y = (n + x - general) / math.sqrt(math.log(n))
        ks = stats.ks_one_sample(y, lambda v: special.ndtr(v / sd))
        es = stats.EmpiricalSample(y, seed)
        rep.samples[f"T1_n{n}"] = y
        rep.row(law.label(), n, "ks_vs_limit", ks.statistic, None, ks.passed)
        rep.row(law.label(), n, "variance", es.var, es.var_stderr)
        rep.row(law.label(), n, "mean", es.mean, es.stderr)
        ks_vals.append(ks.statistic)
        var_last = es.var
    mono = all(b <= a for a, b in zip(ks_vals, ks_vals[1:]))
    worst = max((b - a for a, b in zip(ks_vals, ks_vals[1:])), default=0.0)
    rep.criterion("ks_monotone_nonincreasing", "finite-variance central limit theorem", mono, worst, 0.0, cfg.seed)
    lo, hi = cfg.params["variance_band"]
    rep.criterion(
        "variance_at_max_n",
        "finite-variance central limit theorem",
        lo * target <= var_last <= hi * target,
        var_last,
        hi * target,
        cfg.seed,
    )


def _stable_pq(law):
    b = inc.stable_skewness(law)
    return (0.5 * (1 + b), 0.5 * (1 - b))


def _trend_ok(ns, vals):
    return stats.trend_slope(ns, vals) <= 0.0


def _limit_T2(cfg, rep, workers):
    law = cfg.law_obj()
    _require(law, {inc.Regime.B}, cfg.experiment)
    alpha = inc.stable_index(law)
    pq = _stable_pq(law)
    plan = inc.normalization(law)
    K, tol = int(cfg.params["K"]), float(cfg.params["tol"])
    lseed = derive_seed(cfg.seed, "T2", "limit")
    lim = _sample(lambda rng, k: limits.sample_limit_T2(alpha, pq, K, tol, rng, size=k), cfg.replications, lseed, workers)
    rep.samples["T2_limit"] = lim
    method = cfg.params["method"]
    ks_vals = []
    for n in cfg.n_grid:
        seed = derive_seed(cfg.seed, "T2", n)
        x = _sample(_excess_job(law, n, method), cfg.replications, seed, workers)
        y = n / float(plan(n)) ** 2 * x
        ks = stats.ks_two_sample(y, lim)
        rep.samples[f"T2_n{n}"] = y
        rep.row(law.label(), n, "ks_vs_limit", ks.statistic, None, ks.statistic < cfg.params["threshold"])
        rep.row(law.label(), n, "median", float(np.median(y)), None)
        ks_vals.append(ks.statistic)
    thr = float(cfg.params["threshold"])
    ref = "stable-series limit for alpha in (1,2)"
    rep.criterion("ks_at_max_n", ref, ks_vals[-1] < thr, ks_vals[-1], thr, cfg.seed)
    rep.criterion("ks_trend_nonincreasing", ref, _trend_ok(cfg.n_grid, ks_vals), stats.trend_slope(cfg.n_grid, ks_vals), 0.0, cfg.seed)


def _limit_T3(cfg, rep, workers):
    law = cfg.law_obj()
    _require(law, {inc.Regime.C}, cfg.experiment)
    alpha = inc.stable_index(law)
    p, q = _stable_pq(law)
    plan = inc.normalization(law)
    m = int(cfg.params["m"])
    R = cfg.replications
    lseed = derive_seed(cfg.seed, "T3", "limit")
    lim = stats.run_blocks(lambda rng, k: np.stack(limits.sample_limit_T3(alpha, p, q, m, rng, size=k), axis=1), R, lseed, workers=workers, block_size=BLOCK)
    ks_min, ks_maj = [], []
    for n in cfg.n_grid:
        seed = derive_seed(cfg.seed, "T3", n)
        summ = stats.run_blocks(lambda rng, k: representations.geometric_summaries(law, n, k, rng)[:, :2], R, seed, workers=workers, block_size=BLOCK)
        an = float(plan(n))
        a = stats.ks_two_sample(summ[:, 0] / an, lim[:, 0])
        b = stats.ks_two_sample(summ[:, 1] / an, lim[:, 1])
        rep.samples[f"T3_min_n{n}"] = summ[:, 0] / an
        rep.samples[f"T3_maj_n{n}"] = summ[:, 1] / an
        rep.row(law.label(), n, "ks_minorant_vs_limit", a.statistic, None, None)
        rep.row(law.label(), n, "ks_majorant_vs_limit", b.statistic, None, None)
        ks_min.append(a.statistic)
        ks_maj.append(b.statistic)
    thr = float(cfg.params["threshold"])
    ref = "joint limit for alpha in (0,1)"
    for tag, vals in (("minorant", ks_min), ("majorant", ks_maj)):
        rep.criterion(f"{tag}_ks_at_max_n", ref, vals[-1] < thr, vals[-1], thr, cfg.seed)
        rep.criterion(f"{tag}_ks_trend_nonincreasing", ref, _trend_ok(cfg.n_grid, vals), stats.trend_slope(cfg.n_grid, vals), 0.0, cfg.seed)


def _limit_T5(cfg, rep, workers):
    law = cfg.law_obj()
    _require(law, {inc.Regime.A_PRIME}, cfg.experiment)
    mu, sigma = law.mean, law.sigma
    sd = abs(limits.t5_factor(mu)) * sigma
    repeats = int(cfg.params["repeats"])
    ref = "nonzero-mean limit theorem"
    for n in cfg.n_grid:
        an = sigma * math.sqrt(n)
        centre = math.sqrt(1 + mu * mu) * n
        cache = {}

        def draw(r, n=n):
            if r not in cache:
                seed = derive_seed(cfg.seed, "T5", n, r)
                cache[r] = stats.run_blocks(lambda rng, k: representations.geometric_summaries(law, n, k, rng)[:, :2], cfg.replications, seed, workers=workers, block_size=BLOCK)
            return cache[r]

        for tag, col in (("minorant", 0), ("majorant", 1), ("half_perimeter", None)):
            count = {"r": 0}

            def run(sub_seed, col=col):
                r = count["r"]
                count["r"] += 1
                s = draw(r)
                L = s[:, col] if col is not None else 0.5 * (s[:, 0] + s[:, 1])
                return stats.ks_one_sample((L - centre) / an, lambda v: special.ndtr(v / sd))

            res = _repeat(run, cfg.seed, repeats)
            for i, k in enumerate(res.results):
                rep.row(law.label(), n, f"ks_{tag}_repeat{i}", k.statistic, None, k.passed)
            rep.criterion(f"n{n}/{tag}", ref, res.passed, res.statistic, res.critical, cfg.seed)
        s = draw(0)
        y = (s[:, 0] - centre) / an
        rep.samples[f"T5_min_n{n}"] = y
        rep.row(law.label(), n, "mean_minorant_statistic", float(y.mean()), float(y.std(ddof=1) / math.sqrt(y.size)))
        rep.row(law.label(), n, "variance_minorant_statistic", float(y.var(ddof=1)), stats.EmpiricalSample(y).var_stderr)


def _limit_critical(cfg, rep, workers):
    law = cfg.law_obj()
    _require(law, {inc.Regime.CRITICAL}, cfg.experiment)
    if len(cfg.n_grid) < 2:
        raise ConfigError("limit-critical compares the smallest and largest n; give at least two")
    method = cfg.params["method"]
    repeats = int(cfg.params["repeats"])
    n0, n1 = cfg.n_grid[0], cfg.n_grid[-1]
    cache = {}

    def draw(r, n):
        if (r, n) not in cache:
            seed = derive_seed(cfg.seed, "crit", n, r)
            cache[(r, n)] = (n + _sample(_excess_job(law, n, method), cfg.replications, seed, workers)) / n
        return cache[(r, n)]

    count = {"r": 0}

    def run(sub_seed):
        r = count["r"]
        count["r"] += 1
        return stats.ks_two_sample(draw(r, n0), draw(r, n1))

    res = _repeat(run, cfg.seed, repeats)
    for i, k in enumerate(res.results):
        rep.row(law.label(), n1, f"ks_n{n0}_vs_n{n1}_repeat{i}", k.statistic, None, k.passed)
    for n in cfg.n_grid:
        x = draw(0, n)
        rep.samples[f"critical_n{n}"] = x
        rep.row(law.label(), n, "median_L_over_n", float(np.median(x)), None)
    rep.criterion("stabilization", "symmetric Cauchy critical case", res.passed, res.statistic, res.critical, cfg.seed)


def _moments(cfg, rep, workers):
    law = cfg.law_obj()
    ns = cfg.n_grid
    finite = math.isfinite(law.variance) and law.mean == 0
    if finite:
        t = moments.eta_table(law, ns[-1], rng=derive_seed(cfg.seed, "moments", "table"))
        rep.tables["moments"] = moments.moment_rows(law, ns, table=t)
        for n in ns:
            m = moments.mean_length(law, n, t)
            v = moments.variance_length(law, n, t)
            rep.row(law.label(), n, "mean_length", m, None)
            rep.row(law.label(), n, "variance_length", v, None)
            if isinstance(law, inc.Rademacher) and n <= int(cfg.params["enumerate_max_n"]):
                em, ev = moments.enumerate_length_moments(n)
                tol = float(cfg.params["enumeration_tol"])
                rep.row(law.label(), n, "mean_length_enumeration", em, None, abs(m - em) <= tol)
                rep.row(law.label(), n, "variance_length_enumeration", ev, None, abs(v - ev) <= tol)
                ref = "explicit mean and variance formulas"
                rep.criterion(f"n{n}/mean_matches_enumeration", ref, abs(m - em) <= tol, abs(m - em), tol, cfg.seed)
                rep.criterion(f"n{n}/variance_matches_enumeration", ref, abs(v - ev) <= tol, abs(v - ev), tol, cfg.seed)
    if cfg.params["marginal_identity"]:
        repeats = int(cfg.params["repeats"])
        for n in ns:
            if n > int(cfg.params["marginal_max_n"]):
                continue
            cache = {}

            def draw(r, col, n=n):
                if (r, col) not in cache:
                    seed = derive_seed(cfg.seed, "marginal", n, col, r)
                    cache[(r, col)] = stats.run_blocks(lambda rng, k: representations.geometric_summaries(law, n, k, rng)[:, col], cfg.replications, seed, workers=workers, block_size=BLOCK)
                return cache[(r, col)]

            count = {"r": 0}

            def run(sub_seed):
                r = count["r"]
                count["r"] += 1
                return stats.ks_two_sample(draw(r, 0), draw(r, 1))

            res = _repeat(run, cfg.seed, repeats)
            for i, k in enumerate(res.results):
                rep.row(law.label(), n, f"ks_minorant_vs_majorant_repeat{i}", k.statistic, None, k.passed)
            rep.samples[f"minorant_n{n}"] = draw(0, 0)
            rep.samples[f"majorant_n{n}"] = draw(0, 1)
            rep.criterion(f"n{n}/minorant_majorant_same_law", "minorant and majorant lengths have the same law", res.passed, res.statistic, res.critical, cfg.seed)


def _feller_block(n, tol):
    def job(rng, k):
        kk, pp = permutations.sample_feller_batch(n, k, rng, tol)
        d = np.abs(kk - pp)[:, 1:].astype(np.float64)
        tot = d.sum(axis=1)
        return np.concatenate([d.sum(axis=0), (d * d).sum(axis=0), [tot.sum(), (tot * tot).sum()]])[None, :]

    return job


def _couplings(cfg, rep, workers):
    R = cfg.replications
    tol = float(cfg.params["feller_tol"])
    law_label = "none"
    for n in cfg.n_grid:
        seed = derive_seed(cfg.seed, "feller", n)
        agg = stats.run_blocks(_feller_block(n, tol), R, seed, workers=workers, block_size=min(BLOCK, 20_000)).sum(axis=0)
        s1, s2 = agg[:n], agg[n : 2 * n]
        mean = s1 / R
        se = np.sqrt(np.maximum(s2 / R - mean**2, 0.0) / R)
        bound = 2.0 / (n + 1)
        slack = mean - (bound + 5 * se)
        tot_mean = agg[-2] / R
        tot_se = math.sqrt(max(agg[-1] / R - tot_mean**2, 0.0) / R)
        for j in range(1, n + 1):
            if j <= 10 or j == n:
                rep.row(law_label, n, f"mean_abs_K_minus_P_j{j}", float(mean[j - 1]), float(se[j - 1]), bool(slack[j - 1] <= 0))
        rep.row(law_label, n, "mean_total_abs_K_minus_P", tot_mean, tot_se, tot_mean < 2)
        ref = "Feller coupling bounds"
        rep.criterion(f"n{n}/marginal_bound_all_j", ref, bool(np.all(slack <= 0)), float(np.max(mean - 5 * se)), bound, seed)
        rep.criterion(f"n{n}/joint_bound", ref, tot_mean < 2, tot_mean, 2.0, seed)
    # Poisson-Dirichlet functional identity
    K, ptol = int(cfg.params["pd_K"]), float(cfg.params["pd_tol"])
    powers = [float(s) for s in cfg.params["pd_powers"]]
    pseed = derive_seed(cfg.seed, "pd")

    def pd_job(rng, k):
        w, r = permutations.sample_pd1_batch(k, K, ptol, rng)
        if np.any(r >= ptol):
            raise RuntimeError("PD atoms were dropped beyond K; raise pd_K so the remainder compensator stays exact")
        cols = []
        for s in powers:
            # the unbroken remainder is r times an independent GEM(1) sequence,
            # whose s-power sum has conditional mean r^s / s
            v = np.where(w > 0, w, 1.0) ** s * (w > 0)
            cols.append(v.sum(axis=1) + r**s / s)
        return np.stack(cols, axis=1)

    vals = stats.run_blocks(pd_job, cfg.params["pd_samples"], pseed, workers=workers, block_size=BLOCK)
    for i, s in enumerate(powers):
        m = float(vals[:, i].mean())
        se = float(vals[:, i].std(ddof=1) / math.sqrt(vals.shape[0]))
        lim = max(5 * se, 1e-12)
        rep.row(law_label, 0, f"pd_power_sum_s{s:g}", m, se, abs(m - 1 / s) <= lim)
        rep.criterion(f"pd_power_sum_s{s:g}", "Poisson-Dirichlet functional identity", abs(m - 1 / s) <= lim, abs(m - 1 / s), lim, pseed)
    nf = int(cfg.params["frac_n"])
    val = permutations.pd_fractional_part_mean(nf)
    ratio = val / (0.5 * math.log(nf))
    rep.row(law_label, nf, "fractional_part_mean_ratio", ratio, None, 0.95 <= ratio <= 1.05)
    rep.criterion("fractional_part_mean", "fractional-part asymptotics of PD(1) atoms", 0.95 <= ratio <= 1.05, ratio, 1.05, 0)


def _variance_growth(cfg, rep, workers):
    law = cfg.law_obj()
    ns = cfg.n_grid
    _require(law, {inc.Regime.A}, cfg.experiment)
    sigma2 = law.variance
    if cfg.params["fit"]:
        t = moments.eta_table(law, ns[-1], rng=derive_seed(cfg.seed, "vg", "table"))
        var = [moments.variance_length(law, n, t) for n in ns]
        corr = [moments.correction_term(t, n) for n in ns]
        for n, v, c in zip(ns, var, corr):
            rep.row(law.label(), n, "variance_length", v, None)
            rep.row(law.label(), n, "correction_term", c, None)
        if len(ns) >= 3:
            slope, icpt, resid = stats.fit_log_slope(list(zip(ns, var)))
            target = 0.75 * sigma2**2
            tol = float(cfg.params["slope_tol"])
            rep.row(law.label(), ns[-1], "log_slope", slope, None, abs(slope - target) <= tol)
            rep.criterion("log_slope", "logarithmic variance growth", abs(slope - target) <= tol, slope, target + tol, cfg.seed)
        cap = sigma2**2 * math.pi**2 / 24 + 0.1
        ok = all(0 <= c <= cap for c in corr)
        rep.criterion("correction_term_bounded", "explicit variance formula", ok, max(corr), cap, cfg.seed)
    for n in cfg.params.get("mc_check", []):
        n = int(n)
        seed = derive_seed(cfg.seed, "vg", "mc", n)
        x = _sample(_excess_job(law, n, "geometric"), cfg.replications, seed, workers)
        es = stats.EmpiricalSample(x, seed)
        lb = moments.variance_lower_bound(law, n)
        ok = es.var >= lb - 5 * es.var_stderr
        rep.samples[f"variance_mc_n{n}"] = x
        rep.row(law.label(), n, "mc_variance", es.var, es.var_stderr, ok)
        rep.row(law.label(), n, "variance_lower_bound", lb, None)
        rep.criterion(f"n{n}/variance_above_lower_bound", "variance lower bound from large jumps", ok, es.var, lb, seed)


RUNNERS = {
    "verify-representation": _verify_representation,
    "limit-T1": _limit_T1,
    "limit-T2": _limit_T2,
    "limit-T3": _limit_T3,
    "limit-T5": _limit_T5,
    "limit-critical": _limit_critical,
    "moments": _moments,
    "couplings": _couplings,
    "variance-growth": _variance_growth,
}

DEFAULTS = {
    "verify-representation": {"law": {"kind": "Gaussian", "params": {}}, "n_grid": [5, 10, 50], "replications": 100_000, "params": {"repeats": 3}},
    "limit-T1": {
        "law": {"kind": "Gaussian", "params": {}},
        "n_grid": [1000, 10_000, 100_000, 1_000_000],
        "replications": 100_000,
        "params": {"method": "rep2", "variance_band": [0.8, 1.2]},
    },
    "limit-T2": {
        "law": {"kind": "StableExact", "params": {"alpha": 1.5}},
        "n_grid": [1000, 10_000, 100_000],
        "replications": 100_000,
        "params": {"method": "rep2", "K": permutations.DEFAULT_PD_K, "tol": permutations.DEFAULT_PD_TOL, "threshold": 0.03},
    },
    "limit-T3": {
        "law": {"kind": "StableExact", "params": {"alpha": 0.5}},
        "n_grid": [100, 1000, 10_000],
        "replications": 20_000,
        "params": {"m": 1 << 15, "threshold": 0.03},
    },
    "limit-T5": {"law": {"kind": "Gaussian", "params": {"mu": 1.0, "sigma": 1.0}}, "n_grid": [100_000], "replications": 100_000, "params": {"repeats": 3}},
    "limit-critical": {"law": {"kind": "CauchyStandard", "params": {}}, "n_grid": [1 << 12, 1 << 15], "replications": 100_000, "params": {"method": "rep2", "repeats": 3}},
    "moments": {
        "law": {"kind": "Rademacher", "params": {}},
        "n_grid": [6, 8, 10, 12],
        "replications": 100_000,
        "params": {"enumerate_max_n": 16, "enumeration_tol": 1e-9, "marginal_identity": False, "marginal_max_n": 1000, "repeats": 3},
    },
    "couplings": {
        "law": {"kind": "Zero", "params": {}},
        "n_grid": [10, 50, 200],
        "replications": 1_000_000,
        "params": {"feller_tol": permutations.DEFAULT_FELLER_TOL, "pd_K": 256, "pd_tol": permutations.DEFAULT_PD_TOL, "pd_powers": [0.5, 1, 2, 3], "pd_samples": 1_000_000, "frac_n": 1_000_000},
    },
    "variance-growth": {
        "law": {"kind": "Gaussian", "params": {}},
        "n_grid": [1 << k for k in range(10, 21)],
        "replications": 100_000,
        "params": {"fit": True, "slope_tol": 0.05, "mc_check": []},
    },
}

DESCRIPTIONS = {
    "verify-representation": (
        "Permutation representation of the minorant length",
        "Location: distributional representation via uniform random permutations, extended to discrete laws by smoothing.",
        "Hypotheses: any i.i.d. increments.",
        "Criterion: geometric, ranked-cycle (rep1) and cycle-count (rep2) samples of L_n - n pass every pairwise two-sample KS test at 1% (2 of 3 repeats).",
    ),
    "limit-T1": (
        "Finite-variance central limit theorem: (L_n - n - sum sigma_j^2/(2j)) / sqrt(log n) -> N(0, 3 sigma^4/4)",
        "Location: main theorem for regime A.",
        "Hypotheses: E xi = 0, E xi^2 = sigma^2 < infinity.",
        "Criterion: one-sample KS distance to N(0, 3 sigma^4/4) nonincreasing along n_grid; variance at the largest n within [0.8, 1.2] x 3 sigma^4/4.",
    ),
    "limit-T2": (
        "Stable-series limit: (n/a_n^2)(L_n - n) -> 1/2 sum_k S_alpha(Z_k)^2 / Z_k over Poisson-Dirichlet(1) atoms Z_k",
        "Location: limit theorem for regime B.",
        "Hypotheses: E xi = 0, xi in the domain of attraction of an alpha-stable law with alpha in (1,2).",
        "Criterion: two-sample KS statistic against the truncated series (K atoms, residual < tol) below 0.03 at the largest n and nonincreasing trend.",
    ),
    "limit-T3": (
        "Joint limit (L_n/a_n, majorant/a_n) -> (S(1) - 2 inf S, 2 sup S - S(1))",
        "Location: limit theorem for regime C.",
        "Hypotheses: xi in the domain of attraction of an alpha-stable law with alpha in (0,1).",
        "Criterion: per-coordinate two-sample KS below 0.03 against an m-step stable skeleton, nonincreasing trend.",
    ),
    "limit-T5": (
        "Nonzero mean: (L_n - sqrt(1+mu^2) n)/a_n -> mu/sqrt(1+mu^2) S_alpha(1), also for the majorant and half the perimeter",
        "Location: limit theorem for regime A'.",
        "Hypotheses: E xi = mu != 0, finite variance.",
        "Criterion: one-sample KS at 1% against N(0, mu^2 sigma^2/(1+mu^2)), 2 of 3 repeats, for minorant, majorant and L_n/2.",
    ),
    "limit-critical": (
        "Critical Cauchy case: L_n / n -> length of the convex minorant of a symmetric Cauchy process on [0,1]",
        "Location: remark on the critical case after the moment asymptotics.",
        "Hypotheses: standard symmetric Cauchy increments (a_n = n).",
        "Criterion: two-sample KS at 1% between the smallest and largest n of n_grid (2 of 3 repeats).",
    ),
    "moments": (
        "Explicit mean and variance formulas E L_n - n = sum E eta_j/j and Var L_n",
        "Location: lemma with explicit moment formulas; marginal identity of minorant and majorant.",
        "Hypotheses: E xi = 0, finite variance.",
        "Criterion: Rademacher formulas match exhaustive path enumeration within 1e-9; optional KS of minorant vs majorant length.",
    ),
    "couplings": (
        "Feller coupling and Poisson-Dirichlet identities",
        "Location: coupling of cycle counts with independent Poisson(1/j) counts, E|K_nj - P_j| <= 2/(n+1) and E sum_j |K_nj - P_j| < 2.",
        "Hypotheses: none (uniform random permutations).",
        "Criterion: E|K_nj - P_j| <= 2/(n+1) + 5 stderr for all j; E sum_j |K_nj - P_j| < 2; sum_k E Z_k^s = 1/s; E sum {n Z_k} / (1/2 log n) in [0.95, 1.05].",
    ),
    "variance-growth": (
        "Variance growth Var L_n ~ 3 sigma^4/4 log n",
        "Location: moment asymptotics for regime A.",
        "Hypotheses: E xi = 0, finite variance; the lower bound 0.02 n^3 P(|xi| >= 2n) for heavy tails.",
        "Criterion: least-squares slope of Var L_n against log n within 0.05 of 3 sigma^4/4; correction term within [0, sigma^4 pi^2/24 + 0.1]; optional MC variance above the lower bound.",
    ),
}


def describe(name: str) -> str:
    if name not in DESCRIPTIONS:
        raise ConfigError(f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENTS)}")
    lines = list(DESCRIPTIONS[name])
    d = DEFAULTS[name]
    lines.append(f"Defaults: law={d['law']}, n_grid={d['n_grid']}, replications={d['replications']}, params={d.get('params', {})}")
    return "\n".join(lines)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExitReport:
    rep = ExitReport(cfg)
    t0 = time.perf_counter()
    RUNNERS[cfg.experiment](cfg, rep, workers)
    rep.runtime = time.perf_counter() - t0
    return rep
