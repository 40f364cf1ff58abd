"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-Python/numpy twin with identical arithmetic, so the
two paths agree bit-for-bit (the binomial table only to ~1e-12 relative,
since numba and CPython use different lgamma/exp). Set
``MINORANT_DISABLE_NUMBA=1`` before import to force the fallback path
(useful for debugging and for the benchmark).
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("MINORANT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via the env flag
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# Plain implementations. These are the fallback path, and also the source the
# numba versions are compiled from.
# ---------------------------------------------------------------------------


def _lower_hull_py(y, idx):
    """Monotone-chain lower hull of the points (k, y[k]).

    Writes the vertex indices into ``idx`` and returns their count. Points on
    a straight segment are dropped (cross product <= 0 pops), so consecutive
    slopes are strictly increasing.
    """
    h = 0
    for k in range(y.shape[0]):
        while h >= 2:
            o = idx[h - 2]
            a = idx[h - 1]
            if (a - o) * (y[k] - y[o]) - (y[a] - y[o]) * (k - o) <= 0:
                h -= 1
            else:
                break
        idx[h] = k
        h += 1
    return h


def _hull_length_py(y, idx, h):
    total = 0.0
    for t in range(1, h):
        dx = float(idx[t] - idx[t - 1])
        dy = float(y[idx[t]] - y[idx[t - 1]])
        total += math.sqrt(dx * dx + dy * dy)
    return total


def _walk_summary_py(incr, out):
    """Per row of increments: minorant length, majorant length, S_n, max, min.

    ``out`` has shape (rows, 5). Partial sums are accumulated left to right,
    matching ``np.cumsum``.
    """
    rows, n = incr.shape
    y = np.zeros(n + 1, dtype=np.float64)
    neg = np.zeros(n + 1, dtype=np.float64)
    idx = np.zeros(n + 1, dtype=np.int64)
    for r in range(rows):
        acc = 0.0
        top = 0.0
        bot = 0.0
        for k in range(n):
            acc += incr[r, k]
            y[k + 1] = acc
            neg[k + 1] = -acc
            if acc > top:
                top = acc
            if acc < bot:
                bot = acc
        h = _lower_hull_py(y, idx)
        out[r, 0] = _hull_length_py(y, idx, h)
        h = _lower_hull_py(neg, idx)
        out[r, 1] = _hull_length_py(neg, idx, h)
        out[r, 2] = acc
        out[r, 3] = top
        out[r, 4] = bot
    return out


def _int_walk_summary_py(values, out):
    """Same as the float walk summary, for integer partial sums given directly."""
    rows, m = values.shape
    neg = np.zeros(m, dtype=np.int64)
    idx = np.zeros(m, dtype=np.int64)
    for r in range(rows):
        y = values[r]
        top = y[0]
        bot = y[0]
        for k in range(m):
            neg[k] = -y[k]
            if y[k] > top:
                top = y[k]
            if y[k] < bot:
                bot = y[k]
        h = _lower_hull_py(y, idx)
        out[r, 0] = _hull_length_py(y, idx, h)
        h = _lower_hull_py(neg, idx)
        out[r, 1] = _hull_length_py(neg, idx, h)
        out[r, 2] = y[m - 1]
        out[r, 3] = top
        out[r, 4] = bot
    return out


def _crp_cycle_sizes_py(u, sizes):
    """Chinese-restaurant construction of a uniform permutation's cycles.

    Element i (1-based) opens a new cycle when floor(u*i) == i-1, which has
    probability 1/i; otherwise it is inserted after the uniformly chosen
    earlier element floor(u*i) and joins that element's cycle. Returns the
    number of cycles; their sizes are in ``sizes[:count]`` in opening order.
    """
    n = u.shape[0]
    label = np.empty(n, dtype=np.int64)
    count = 0
    for i in range(1, n + 1):
        k = int(u[i - 1] * i)
        if k >= i - 1:
            label[i - 1] = count
            sizes[count] = 1
            count += 1
        else:
            c = label[k]
            label[i - 1] = c
            sizes[c] += 1
    return count


def _crp_batch_py(u, rows, sizes):
    """CRP cycle sizes for each row of ``u``; flat outputs, returns total count."""
    r, n = u.shape
    buf = np.zeros(n, dtype=np.int64)
    total = 0
    for i in range(r):
        c = _crp_cycle_sizes_py(u[i], buf)
        for k in range(c):
            rows[total] = i
            sizes[total] = buf[k]
            total += 1
    return total


def _binomial_eta_table_py(nmax, width, out):
    """E eta_j, E eta_j^2 and E g(|S_j|/j) for the simple symmetric walk.

    S_j = 2k - j with k ~ Binomial(j, 1/2). Only k within ``width`` standard
    deviations of j/2 are summed; the neglected mass is below 1e-40 for the
    default width.
    """
    for j in range(1, nmax + 1):
        half = 0.5 * j
        sd = 0.5 * math.sqrt(j)
        lo = max(0, int(half - width * sd))
        hi = min(j, int(half + width * sd) + 1)
        lj = math.lgamma(j + 1.0) - j * math.log(2.0)
        m1 = 0.0
        m2 = 0.0
        mg = 0.0
        for k in range(lo, hi + 1):
            p = math.exp(lj - math.lgamma(k + 1.0) - math.lgamma(j - k + 1.0))
            s = 2.0 * k - j
            e = s * s / (j + math.sqrt(j * j + s * s))
            x = abs(s) / j
            r = 1.0 + math.sqrt(1.0 + x * x)
            m1 += p * e
            m2 += p * e * e
            mg += p * (x * x * x * x) / (2.0 * r * r)
        out[j - 1, 0] = m1
        out[j - 1, 1] = m2
        out[j - 1, 2] = mg
    return out


if NUMBA_AVAILABLE:
    _lower_hull = njit(cache=True, nogil=True)(_lower_hull_py)
    _hull_length = njit(cache=True, nogil=True)(_hull_length_py)

    @njit(cache=True, nogil=True)
    def _walk_summary(incr, out):
        rows, n = incr.shape
        y = np.zeros(n + 1, dtype=np.float64)
        neg = np.zeros(n + 1, dtype=np.float64)
        idx = np.zeros(n + 1, dtype=np.int64)
        for r in range(rows):
            acc = 0.0
            top = 0.0
            bot = 0.0
            for k in range(n):
                acc += incr[r, k]
                y[k + 1] = acc
                neg[k + 1] = -acc
                if acc > top:
                    top = acc
                if acc < bot:
                    bot = acc
            h = _lower_hull(y, idx)
            out[r, 0] = _hull_length(y, idx, h)
            h = _lower_hull(neg, idx)
            out[r, 1] = _hull_length(neg, idx, h)
            out[r, 2] = acc
            out[r, 3] = top
            out[r, 4] = bot
        return out

    @njit(cache=True, nogil=True)
    def _int_walk_summary(values, out):
        rows, m = values.shape
        neg = np.zeros(m, dtype=np.int64)
        idx = np.zeros(m, dtype=np.int64)
        for r in range(rows):
            y = values[r]
            top = y[0]
            bot = y[0]
            for k in range(m):
                neg[k] = -y[k]
                if y[k] > top:
                    top = y[k]
                if y[k] < bot:
                    bot = y[k]
            h = _lower_hull(y, idx)
            out[r, 0] = _hull_length(y, idx, h)
            h = _lower_hull(neg, idx)
            out[r, 1] = _hull_length(neg, idx, h)
            out[r, 2] = y[m - 1]
            out[r, 3] = top
            out[r, 4] = bot
        return out

    _crp_cycle_sizes = njit(cache=True, nogil=True)(_crp_cycle_sizes_py)
    _binomial_eta_table = njit(cache=True, nogil=True)(_binomial_eta_table_py)

    @njit(cache=True, nogil=True)
    def _crp_batch(u, rows, sizes):
        r, n = u.shape
        buf = np.zeros(n, dtype=np.int64)
        total = 0
        for i in range(r):
            c = _crp_cycle_sizes(u[i], buf)
            for k in range(c):
                rows[total] = i
                sizes[total] = buf[k]
                total += 1
        return total
else:
    _lower_hull = _lower_hull_py
    _hull_length = _hull_length_py
    _walk_summary = _walk_summary_py
    _int_walk_summary = _int_walk_summary_py
    _crp_cycle_sizes = _crp_cycle_sizes_py
    _binomial_eta_table = _binomial_eta_table_py
    _crp_batch = _crp_batch_py


# ---------------------------------------------------------------------------
# Public wrappers
# ---------------------------------------------------------------------------


def lower_hull_indices(values, *, use_numba: bool | None = None) -> np.ndarray:
    """Indices of the lower-hull vertices of the points (k, values[k])."""
    y = np.ascontiguousarray(values)
    if y.dtype.kind in "iub":
        y = y.astype(np.int64, copy=False)
    else:
        y = y.astype(np.float64, copy=False)
    idx = np.zeros(y.shape[0], dtype=np.int64)
    fn = _lower_hull if _pick(use_numba) else _lower_hull_py
    h = fn(y, idx)
    return idx[:h].copy()


def walk_summary(increments, *, use_numba: bool | None = None) -> np.ndarray:
    """Rows of (L_min, L_maj, S_n, M_n, m_n) for each row of float increments."""
    incr = np.ascontiguousarray(increments, dtype=np.float64)
    if incr.ndim == 1:
        incr = incr[None, :]
    out = np.empty((incr.shape[0], 5), dtype=np.float64)
    fn = _walk_summary if _pick(use_numba) else _walk_summary_py
    return fn(incr, out)


def int_walk_summary(values, *, use_numba: bool | None = None) -> np.ndarray:
    """Like :func:`walk_summary` but takes integer partial sums (S_0..S_n) per row."""
    vals = np.ascontiguousarray(values, dtype=np.int64)
    if vals.ndim == 1:
        vals = vals[None, :]
    out = np.empty((vals.shape[0], 5), dtype=np.float64)
    fn = _int_walk_summary if _pick(use_numba) else _int_walk_summary_py
    return fn(vals, out)


def crp_cycle_sizes(u, *, use_numba: bool | None = None) -> np.ndarray:
    u = np.ascontiguousarray(u, dtype=np.float64)
    sizes = np.zeros(u.shape[0], dtype=np.int64)
    fn = _crp_cycle_sizes if _pick(use_numba) else _crp_cycle_sizes_py
    count = fn(u, sizes)
    return sizes[:count].copy()


def crp_cycle_sizes_batch(u, *, use_numba: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """CRP cycles for every row of ``u``: returns flat (row index, cycle size) arrays."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    if u.ndim == 1:
        u = u[None, :]
    cap = u.shape[0] * u.shape[1]
    rows = np.empty(cap, dtype=np.int64)
    sizes = np.empty(cap, dtype=np.int64)
    fn = _crp_batch if _pick(use_numba) else _crp_batch_py
    total = fn(u, rows, sizes)
    return rows[:total].copy(), sizes[:total].copy()


def binomial_eta_table(nmax: int, width: float = 40.0, *, use_numba: bool | None = None) -> np.ndarray:
    out = np.empty((nmax, 3), dtype=np.float64)
    fn = _binomial_eta_table if _pick(use_numba) else _binomial_eta_table_py
    return fn(int(nmax), float(width), out)


def _pick(use_numba):
    if use_numba is None:
        return NUMBA_AVAILABLE
    if use_numba and not NUMBA_AVAILABLE:
        raise RuntimeError("numba path requested but numba is disabled or missing")
    return bool(use_numba)
