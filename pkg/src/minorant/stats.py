"""ECDFs, Kolmogorov-Smirnov tests, log-slope fits and the replication driver.

Determinism contract: replication i always draws from the same stream, so a
run gives identical values whatever the number of workers. Vectorized jobs
work on fixed blocks of ``block_size`` replications; block b uses the stream
keyed by (seed, b).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import derive_seed, stream

KS_COEFF_1PCT = 1.628
_MAGIC = b"EMPS"
_VERSION = 1


def config_digest(config) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class EmpiricalSample:
    values: np.ndarray
    seed: int = 0
    config_digest: str = ""
    n_replications: int = field(default=-1)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.n_replications < 0:
            self.n_replications = int(self.values.shape[0])
        if self.values.shape != (self.n_replications,):
            raise ValueError("values.length must equal n_replications")

    def ecdf(self, x):
        """Right-continuous ECDF evaluated at ``x``."""
        s = np.sort(self.values)
        return np.searchsorted(s, x, side="right") / s.shape[0]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def var(self) -> float:
        return float(np.var(self.values, ddof=1))

    @property
    def stderr(self) -> float:
        return math.sqrt(self.var / self.n_replications)

    @property
    def var_stderr(self) -> float:
        """Standard error of the sample variance from the fourth central moment."""
        n = self.n_replications
        c = self.values - self.values.mean()
        m2 = np.mean(c * c)
        m4 = np.mean(c**4)
        return math.sqrt(max(m4 - (n - 3) / (n - 1) * m2 * m2, 0.0) / n)

    # -- persistence --------------------------------------------------------

    def save_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_MAGIC + struct.pack("<IQ", _VERSION, self.n_replications))
            fh.write(self.values.astype("<f8").tobytes())

    @classmethod
    def load_binary(cls, path, seed: int = 0, config_digest: str = "") -> "EmpiricalSample":
        with open(path, "rb") as fh:
            head = fh.read(16)
            if head[:4] != _MAGIC:
                raise ValueError("not an EmpiricalSample file")
            version, count = struct.unpack("<IQ", head[4:])
            if version != _VERSION:
                raise ValueError(f"unsupported version {version}")
            vals = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if vals.shape[0] != count:
            raise ValueError("truncated EmpiricalSample file")
        return cls(vals.astype(np.float64), seed, config_digest, int(count))

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replication", "value"])
            for i, v in enumerate(self.values.tolist()):
                w.writerow([i, repr(v)])

    @classmethod
    def load_csv(cls, path) -> "EmpiricalSample":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([float(r["value"]) for r in rows]))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    critical_1pct: float
    sample_sizes: tuple

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_1pct

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "critical_1pct": self.critical_1pct,
            "pass": self.passed,
            "sample_sizes": list(self.sample_sizes),
        }


def _values(x):
    return x.values if isinstance(x, EmpiricalSample) else np.asarray(x, dtype=np.float64)


def ks_critical(m: int, n: int | None = None) -> float:
    if n is None:
        return KS_COEFF_1PCT / math.sqrt(m)
    return KS_COEFF_1PCT * math.sqrt((m + n) / (m * n))


def ks_two_sample(a, b) -> KsResult:
    """Sup distance of the two ECDFs, evaluated at every pooled data point."""
    x = np.sort(_values(a))
    y = np.sort(_values(b))
    if x.size == 0 or y.size == 0:
        raise ValueError("KS needs nonempty samples")
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / x.size
    fy = np.searchsorted(y, pts, side="right") / y.size
    d = float(np.max(np.abs(fx - fy)))
    return KsResult(d, ks_critical(x.size, y.size), (int(x.size), int(y.size)))


def ks_one_sample(a, cdf: Callable) -> KsResult:
    x = np.sort(_values(a))
    n = x.size
    if n == 0:
        raise ValueError("KS needs a nonempty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    return KsResult(d, ks_critical(n), (int(n), 0))


@dataclass(frozen=True)
class RepeatedKs:
    results: tuple
    passed: bool

    @property
    def statistic(self) -> float:
        """Median statistic over the repeats that were run."""
        return float(np.median([r.statistic for r in self.results]))

    @property
    def critical(self) -> float:
        return self.results[0].critical_1pct


def repeated_ks(run: Callable[[int], KsResult], seed: int, repeats: int = 3, need: int = 2) -> RepeatedKs:
    """2-of-3 policy: ``run(sub_seed)`` per repeat on disjoint seeds, early stop."""
    out = []
    passes = fails = 0
    for r in range(repeats):
        res = run(derive_seed(seed, "repeat", r))
        out.append(res)
        passes += res.passed
        fails += not res.passed
        if passes >= need or fails > repeats - need:
            break
    return RepeatedKs(tuple(out), passes >= need)


def fit_log_slope(pairs) -> tuple[float, float, float]:
    """Least squares y = slope * log n + intercept; returns (slope, intercept, max |residual|)."""
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise ValueError("need at least 3 (n, y) points")
    n, y = arr[:, 0], arr[:, 1]
    if np.unique(n).size != n.size or np.any(n <= 0):
        raise ValueError("n values must be positive and distinct")
    x = np.log(n)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


def trend_slope(ns, values) -> float:
    """Least-squares slope of ``values`` against log n."""
    return fit_log_slope(list(zip(ns, values)))[0] if len(ns) >= 3 else float(np.sign(values[-1] - values[0]))


# ---------------------------------------------------------------------------
# Replications
# ---------------------------------------------------------------------------


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("MINORANT_WORKERS", "1")))
    except ValueError:
        return 1


def run_replications(job: Callable, N: int, seed: int, *, workers: int | None = None, block_size: int | None = None, config=None) -> EmpiricalSample:
    """Evaluate ``job`` N times with per-replication (or per-block) streams.

    Scalar mode (``block_size=None``): ``job(rng)`` returns one value and
    replication i uses stream (seed, i). Block mode: ``job(rng, count)``
    returns ``count`` values and block b covers replications
    b*block_size .. (b+1)*block_size - 1 with stream (seed, b).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    if block_size is None:
        tasks = [(i, 1) for i in range(N)]

        def one(task):
            return np.array([float(job(stream(seed, task[0])))])

    else:
        nb = -(-N // block_size)
        tasks = [(b, min(block_size, N - b * block_size)) for b in range(nb)]

        def one(task):
            vals = np.asarray(job(stream(seed, task[0]), task[1]), dtype=np.float64)
            if vals.shape != (task[1],):
                raise ValueError("block job returned the wrong number of values")
            return vals

    if workers == 1:
        parts = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(one, tasks))  # map keeps task order
    return EmpiricalSample(np.concatenate(parts), int(seed), config_digest(config) if config is not None else "", N)


def run_blocks(job: Callable, N: int, seed: int, *, workers: int | None = None, block_size: int = 10_000) -> np.ndarray:
    """Like block-mode :func:`run_replications` but ``job`` may return rows (2-D)."""
    workers = default_workers() if workers is None else max(1, int(workers))
    nb = -(-N // block_size)
    tasks = [(b, min(block_size, N - b * block_size)) for b in range(nb)]

    def one(task):
        return np.asarray(job(stream(seed, task[0]), task[1]))

    if workers == 1:
        parts = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(one, tasks))
    return np.concatenate(parts)
