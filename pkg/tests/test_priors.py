from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvssv.design import ar_design
from tvssv.errors import DataError
from tvssv.priors import (
    MinnesotaHyper,
    ar_residual_variance,
    default_uni_prior,
    estimate_scales,
    initial_logvol_mean,
    minnesota_cov,
    minnesota_means,
    minnesota_variances,
    univariate_pi_variances,
)


def test_minnesota_own_and_cross_lags():
    V = minnesota_variances(MinnesotaHyper(), [1.0, 1.0], 2, 2)
    assert V.shape == (2, 5)
    np.testing.assert_allclose(V[:, 0], 100.0)
    assert V[0, 1] == pytest.approx(0.04)
    assert V[1, 2] == pytest.approx(0.04)
    assert V[0, 3] == pytest.approx(0.01)
    assert V[0, 2] == pytest.approx(0.001)
    assert V[1, 1] == pytest.approx(0.001)
    assert V[1, 3] == pytest.approx(0.00025)
    assert V[0, 4] == pytest.approx(0.00025)


def test_minnesota_cross_scaling():
    V = minnesota_variances(MinnesotaHyper(), [4.0, 1.0], 2, 1)
    # row 1, column of variable 2: theta1 * theta2 * s1 / s2
    assert V[0, 2] == pytest.approx(0.04 * 0.025 * 4.0)
    assert V[1, 1] == pytest.approx(0.04 * 0.025 / 4.0)


def test_minnesota_cov_is_diagonal_in_equation_order():
    C = minnesota_cov(MinnesotaHyper(), [1.0, 2.0], 2, 1)
    V = minnesota_variances(MinnesotaHyper(), [1.0, 2.0], 2, 1)
    np.testing.assert_array_equal(np.diag(C), V.reshape(-1))
    assert np.count_nonzero(C - np.diag(np.diag(C))) == 0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.001, 1.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_theta1_scales_all_lag_variances(t1, s1, s2):
    a = minnesota_variances(MinnesotaHyper(theta1=t1), [s1, s2], 2, 3)
    b = minnesota_variances(MinnesotaHyper(theta1=2 * t1), [s1, s2], 2, 3)
    np.testing.assert_allclose(b[:, 1:], 2 * a[:, 1:], rtol=1e-12)
    np.testing.assert_array_equal(b[:, 0], a[:, 0])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6))
def test_variances_decay_with_lag(N, p):
    V = minnesota_variances(MinnesotaHyper(), np.linspace(0.5, 2, N), N, p)
    blocks = [V[:, 1 + l * N : 1 + (l + 1) * N] for l in range(p)]
    for a, b in zip(blocks, blocks[1:]):
        assert np.all(b < a)


def test_hyper_validation():
    with pytest.raises(ValueError):
        MinnesotaHyper(theta1=0.0)


def test_means_center_first_own_lag():
    M = minnesota_means(2, 2, [1.0, 0.0])
    expected = np.zeros((2, 5))
    expected[0, 1] = 1.0
    np.testing.assert_array_equal(M, expected)


def test_ar1_innovation_variance(rng):
    T = 20_000
    x = np.zeros(T)
    for t in range(1, T):
        x[t] = 0.7 * x[t - 1] + rng.standard_normal()
    assert ar_residual_variance(x, 1) == pytest.approx(1.0, rel=0.03)


def test_scale_estimates_within_five_percent(rng):
    T = 5000
    sd = np.array([0.5, 2.0])
    e = rng.standard_normal((T, 2)) * sd
    x = np.zeros((T, 2))
    for t in range(1, T):
        x[t] = 0.5 * x[t - 1] + e[t]
    np.testing.assert_allclose(estimate_scales(x, 12), sd**2, rtol=0.05)


def test_constant_series_is_degenerate():
    with pytest.raises(DataError, match="degenerate series"):
        estimate_scales(np.full(100, 3.0))


def test_too_short_series():
    with pytest.raises(DataError):
        ar_residual_variance(np.arange(10.0), 5)


def test_initial_logvol_mean_uses_leading_window(rng):
    x = np.r_[rng.standard_normal(40), 100 * rng.standard_normal(200)]
    assert abs(initial_logvol_mean(x)) < 1.0


def test_univariate_design_variances(rng):
    series = {"y": rng.standard_normal(300), "z": 3 * rng.standard_normal(300)}
    design = ar_design("y", 2, True, [("z", 1)])
    V = univariate_pi_variances(design, "y", series)
    labels = design.labels
    got = dict(zip(labels, V))
    assert got[labels[0]] == 100.0
    assert got["y.L1"] == pytest.approx(0.04)
    assert got["y.L2"] == pytest.approx(0.01)
    ratio = got["z.L1"] / (0.04 * 0.025)
    assert ratio == pytest.approx(1 / 9, rel=0.15)


def test_default_uni_prior_structure(rng):
    series = {"y": rng.standard_normal(200)}
    design = ar_design("y", 2)
    pr = default_uni_prior(design, "y", series, k_shape=1, own_lag_center=1.0)
    assert pr.pi_mean.tolist() == [0.0, 1.0, 0.0]
    assert pr.phi_lam_mean.size == 2
    assert math.isfinite(pr.h0_mean)
