from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tvssv.forecast import PredictiveDensity
from tvssv.scoring import (
    SCORE_COLUMNS,
    build_report,
    crps,
    crps_quantile,
    dm_test,
    log_score,
    pit,
    quantile_score,
    score_forecasts,
    twcrps,
)


def _normal_pd(draws=None, loc=0.0, scale=1.0):
    d = np.zeros(1) if draws is None else draws
    return PredictiveDensity(None, 1, d, np.array([loc]), np.array([scale]), np.array([0.0]))


def test_log_score_standard_normal():
    assert log_score(_normal_pd(), 0.0) == pytest.approx(0.9189385332, abs=1e-9)
    assert log_score(_normal_pd(), 1.0) == pytest.approx(1.4189385332, abs=1e-9)


def test_crps_standard_normal_closed_form():
    x = stats.norm.ppf((np.arange(200_000) + 0.5) / 200_000)
    # 2 phi(0) - 1 / sqrt(pi)
    assert crps(x, 0.0) == pytest.approx(0.2336949772, rel=0.005)


def test_crps_two_forms_agree(rng):
    x = rng.standard_normal(50_000)
    for y in (-1.5, 0.0, 0.7):
        assert crps_quantile(x, y) == pytest.approx(crps(x, y), rel=0.01)


def test_crps_point_mass_is_absolute_error():
    assert crps(np.full(10, 2.0), -1.0) == pytest.approx(3.0)


def test_quantile_score_hand_cases():
    assert quantile_score(0.0, 1.0, 0.5) == pytest.approx(1.0)
    assert quantile_score(1.0, 0.0, 0.85) == pytest.approx(0.3)
    assert quantile_score(2.0, 2.0, 0.1) == 0.0


@settings(max_examples=80, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.01, 0.99))
def test_quantile_score_nonnegative(q, y, a):
    assert quantile_score(q, y, a) >= 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=2, max_size=100), st.floats(-20, 20))
def test_tail_weighted_below_uniform(xs, y):
    x = np.array(xs)
    assert twcrps(x, y) <= crps_quantile(x, y) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=2, max_size=100), st.floats(-20, 20), st.floats(0.1, 10))
def test_scores_are_scale_equivariant(xs, y, c):
    x = np.array(xs)
    assert crps(c * x, c * y) == pytest.approx(c * crps(x, y), rel=1e-9, abs=1e-9)
    assert twcrps(c * x, c * y) == pytest.approx(c * twcrps(x, y), rel=1e-9, abs=1e-9)


def test_pit_extremes_and_uniformity(rng):
    x = rng.standard_normal(1000)
    assert pit(x, -100.0) == 0.0
    assert pit(x, 100.0) == 1.0
    u = [pit(rng.standard_normal(2000), rng.standard_normal()) for _ in range(2000)]
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_dm_identical_losses():
    a = np.linspace(0, 1, 30)
    r = dm_test(a, a)
    assert r.p_value == 0.5 and r.stat == 0.0 and r.degenerate


def test_dm_detects_better_forecast(rng):
    a = rng.normal(1.0, 0.5, 200)
    b = a + rng.normal(0.3, 0.2, 200)
    assert dm_test(a, b).p_value < 0.001
    assert dm_test(b, a).p_value > 0.999


def test_dm_antisymmetric(rng):
    a, b = rng.standard_normal(50), rng.standard_normal(50)
    r1, r2 = dm_test(a, b, horizon=3), dm_test(b, a, horizon=3)
    assert r1.stat == pytest.approx(-r2.stat)
    assert r1.p_value + r2.p_value == pytest.approx(1.0)


def test_dm_bartlett_hand_case():
    d = np.array([1.0, -1.0, 2.0, 0.0, 1.0, -2.0, 3.0, 1.0, 0.0, 1.0])
    T = d.size
    dc = d - d.mean()
    g0 = dc @ dc / T
    g1 = dc[1:] @ dc[:-1] / T
    lrv = g0 + 2 * 0.5 * g1  # horizon 2: one lag with weight 1/2
    r = dm_test(d, np.zeros(T), horizon=2)
    assert r.stat == pytest.approx(d.mean() / math.sqrt(lrv / T))
    assert r.p_value == pytest.approx(stats.norm.cdf(r.stat))


def test_dm_two_sided():
    d = np.array([0.5, -0.1, 0.3, 0.2, 0.4, -0.2, 0.1, 0.6, 0.0, 0.3])
    r = dm_test(d, np.zeros(10), one_sided=False)
    assert r.p_value == pytest.approx(2 * stats.norm.sf(abs(r.stat)))


def test_dm_length_checks():
    with pytest.raises(ValueError):
        dm_test(np.zeros(9), np.zeros(9))
    with pytest.raises(ValueError):
        dm_test(np.zeros(12), np.zeros(11))


def test_dm_constant_nonzero_difference():
    r = dm_test(np.zeros(12), np.ones(12))
    assert r.degenerate and r.p_value == 0.0


def test_report_identical_models(rng):
    fc = [_normal_pd(rng.standard_normal(500), loc=0.0) for _ in range(12)]
    y = rng.standard_normal(12)
    s = score_forecasts(fc, y)
    rep = build_report({"a": s, "b": s}, "a")
    assert rep.n_origins == 12
    for c in SCORE_COLUMNS:
        v, p = rep.rows["b"][c]
        assert v == pytest.approx(0.0 if c == "logscore" else 1.0)
        assert p == 0.5
    recs = rep.to_records()
    assert [r["model"] for r in recs] == ["a", "b"]
    assert "logscore" in rep.to_text()


def test_report_without_enough_origins(rng):
    fc = [_normal_pd(rng.standard_normal(100)) for _ in range(5)]
    s = score_forecasts(fc, np.zeros(5))
    rep = build_report({"a": s, "b": s}, "a")
    assert all(math.isnan(rep.rows["b"][c][1]) for c in SCORE_COLUMNS)


def test_score_forecasts_keys(rng):
    s = score_forecasts([_normal_pd(rng.standard_normal(100))], [0.3])
    assert set(s) == {*SCORE_COLUMNS, "pit"}
