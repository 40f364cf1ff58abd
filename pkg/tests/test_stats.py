import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sps

from minorant.rng import stream
from minorant.stats import (
    EmpiricalSample,
    KsResult,
    fit_log_slope,
    ks_critical,
    ks_one_sample,
    ks_two_sample,
    repeated_ks,
    run_blocks,
    run_replications,
    trend_slope,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)
samples = arrays(np.float64, st.integers(1, 60), elements=finite)


# -- KS ----------------------------------------------------------------------


def test_identical_samples_statistic_zero():
    a = stream(1).normal(size=500)
    r = ks_two_sample(a, a.copy())
    assert r.statistic == 0.0
    assert r.passed


def test_shifted_uniforms_half():
    rng = stream(2)
    r = ks_two_sample(rng.random(10**4), rng.random(10**4) + 0.5)
    assert r.statistic == pytest.approx(0.5, abs=0.03)
    assert not r.passed


def test_same_law_passes_two_of_three():
    res = repeated_ks(lambda s: ks_two_sample(stream(s, 0).normal(size=10**5), stream(s, 1).normal(size=10**5)), 3)
    assert res.passed


def test_critical_values():
    assert ks_critical(100, 100) == pytest.approx(1.628 * math.sqrt(0.02))
    assert ks_critical(10**5, 10**5) == pytest.approx(1.628 * math.sqrt(2e-5))
    assert ks_critical(400) == pytest.approx(1.628 / 20)


@settings(max_examples=200)
@given(samples, samples)
def test_two_sample_matches_scipy(a, b):
    r = ks_two_sample(a, b)
    assert r.statistic == pytest.approx(sps.ks_2samp(a, b, method="asymp").statistic, abs=1e-12)
    assert 0 <= r.statistic <= 1
    assert r.passed == (r.statistic < r.critical_1pct)
    assert r.critical_1pct == pytest.approx(1.628 * math.sqrt((a.size + b.size) / (a.size * b.size)))


@given(samples)
def test_one_sample_matches_scipy(a):
    r = ks_one_sample(a, sps.norm.cdf)
    assert r.statistic == pytest.approx(sps.kstest(a, "norm").statistic, abs=1e-12)


@given(samples, samples, st.sampled_from(["exp", "cube", "affine", "arctan"]))
def test_ks_invariant_under_increasing_transform(a, b, kind):
    f = {
        "exp": lambda x: np.exp(x / 1e6),
        "cube": lambda x: x**3,
        "affine": lambda x: 3 * x - 7,
        "arctan": np.arctan,
    }[kind]
    fa, fb = f(a), f(b)
    # only transforms that stay strictly increasing in floating point count
    pool = np.unique(np.concatenate([a, b]))
    if np.unique(f(pool)).size != pool.size:
        return
    assert ks_two_sample(fa, fb).statistic == ks_two_sample(a, b).statistic


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])
    with pytest.raises(ValueError):
        ks_one_sample([], sps.norm.cdf)


def test_ks_result_json():
    r = ks_two_sample([0.0, 1.0], [0.5, 2.0])
    d = json.loads(json.dumps(r.to_dict()))
    assert set(d) == {"statistic", "critical_1pct", "pass", "sample_sizes"}
    assert d["sample_sizes"] == [2, 2]
    assert KsResult(0.1, 0.2, (1, 1)).passed and not KsResult(0.2, 0.2, (1, 1)).passed


def test_repeated_ks_policy():
    seq = iter([True, True, False])
    calls = []

    def run(seed):
        calls.append(seed)
        ok = next(seq)
        return KsResult(0.0 if ok else 1.0, 0.5, (1, 1))

    res = repeated_ks(run, 0)
    assert res.passed and len(calls) == 2  # early stop after two passes
    seq = iter([False, False, True])
    calls.clear()
    assert not repeated_ks(run, 0).passed and len(calls) == 2
    seq = iter([True, False, True])
    calls.clear()
    res = repeated_ks(run, 0)
    assert res.passed and len(calls) == 3 and len(set(calls)) == 3


# -- ECDF ----------------------------------------------------------------------


@given(samples, st.lists(finite, min_size=2, max_size=20))
def test_ecdf_properties(vals, xs):
    s = EmpiricalSample(vals)
    xs = np.sort(np.asarray(xs))
    f = s.ecdf(xs)
    assert np.all(np.diff(f) >= 0)
    assert np.all((f >= 0) & (f <= 1))
    assert s.ecdf(vals.min() - 1.0) == 0.0
    assert s.ecdf(vals.max()) == 1.0
    # right-continuity: value at a data point counts that point
    v = vals[0]
    assert s.ecdf(v) == np.mean(vals <= v)


def test_sample_moments_and_variance_stderr():
    x = stream(5).normal(size=200_000)
    s = EmpiricalSample(x)
    assert s.mean == pytest.approx(0, abs=5 * s.stderr)
    assert s.var == pytest.approx(1, abs=5 * s.var_stderr)
    # normal: sd of the sample variance is sqrt(2/N)
    assert s.var_stderr == pytest.approx(math.sqrt(2 / 200_000), rel=0.02)


def test_length_invariant():
    with pytest.raises(ValueError):
        EmpiricalSample(np.zeros(3), n_replications=4)


# -- persistence -------------------------------------------------------------------


def test_binary_round_trip(tmp_path):
    s = EmpiricalSample(stream(6).normal(size=1001), seed=6, config_digest="abc")
    p = tmp_path / "x.bin"
    s.save_binary(p)
    raw = p.read_bytes()
    assert raw[:4] == b"EMPS"
    assert len(raw) == 16 + 8 * 1001
    assert int.from_bytes(raw[8:16], "little") == 1001
    back = EmpiricalSample.load_binary(p)
    assert np.array_equal(back.values, s.values)
    assert np.array_equal(np.frombuffer(raw[16:], "<f8"), s.values)


def test_binary_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(ValueError):
        EmpiricalSample.load_binary(p)
    s = EmpiricalSample(np.arange(4.0))
    s.save_binary(p)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        EmpiricalSample.load_binary(p)


def test_csv_round_trip(tmp_path):
    s = EmpiricalSample(np.array([0.1, -2.5e-300, 1e300, 3.0]))
    p = tmp_path / "x.csv"
    s.save_csv(p)
    assert p.read_text().splitlines()[0] == "replication,value"
    assert np.array_equal(EmpiricalSample.load_csv(p).values, s.values)


# -- regression --------------------------------------------------------------------


def test_fit_log_slope_examples():
    ns = [2**k for k in range(5, 15)]
    slope, icpt, res = fit_log_slope([(n, 0.75 * math.log(n)) for n in ns])
    assert slope == pytest.approx(0.75, abs=1e-12)
    assert res == pytest.approx(0, abs=1e-12)
    assert fit_log_slope([(n, 2.0) for n in ns])[0] == pytest.approx(0, abs=1e-12)
    rng = stream(7)
    slope = fit_log_slope([(n, math.log(n) + 0.01 * rng.normal()) for n in ns])[0]
    assert 0.95 <= slope <= 1.05


def test_fit_log_slope_errors():
    with pytest.raises(ValueError):
        fit_log_slope([(1, 1.0), (2, 2.0)])
    with pytest.raises(ValueError):
        fit_log_slope([(4, 1.0), (4, 2.0), (8, 3.0)])
    with pytest.raises(ValueError):
        fit_log_slope([(0, 1.0), (2, 2.0), (8, 3.0)])


def test_trend_slope_sign():
    assert trend_slope([10, 100, 1000], [3.0, 2.0, 1.0]) < 0
    assert trend_slope([10, 100], [1.0, 2.0]) > 0


# -- replications ------------------------------------------------------------------


def _job(rng):
    return rng.normal() + rng.standard_cauchy()


def test_single_replication_deterministic():
    a = run_replications(_job, 1, 42)
    b = run_replications(_job, 1, 42)
    assert a.values.shape == (1,) and np.array_equal(a.values, b.values)


def test_constant_job():
    assert np.all(run_replications(lambda rng: 3.5, 50, 0).values == 3.5)


@pytest.mark.parametrize("block", [None, 7])
def test_worker_count_invariance(block):
    job = _job if block is None else (lambda rng, k: rng.normal(size=k))
    ref = run_replications(job, 100, 9, workers=1, block_size=block).values
    for w in (2, 8):
        assert np.array_equal(run_replications(job, 100, 9, workers=w, block_size=block).values, ref)


def test_replication_streams_are_indexed():
    vals = run_replications(lambda rng: rng.random(), 5, 11).values
    assert vals[3] == stream(11, 3).random()


def test_block_mode_checks_length():
    with pytest.raises(ValueError):
        run_replications(lambda rng, k: np.zeros(k + 1), 10, 0, block_size=4)


def test_run_blocks_rows():
    out = run_blocks(lambda rng, k: rng.normal(size=(k, 2)), 25, 3, workers=4, block_size=10)
    assert out.shape == (25, 2)
    assert np.array_equal(out, run_blocks(lambda rng, k: rng.normal(size=(k, 2)), 25, 3, workers=1, block_size=10))


def test_workers_env_fallback(monkeypatch):
    from minorant.stats import default_workers

    monkeypatch.setenv("MINORANT_WORKERS", "6")
    assert default_workers() == 6
    monkeypatch.setenv("MINORANT_WORKERS", "junk")
    assert default_workers() == 1


def test_n_must_be_positive():
    with pytest.raises(ValueError):
        run_replications(_job, 0, 1)
