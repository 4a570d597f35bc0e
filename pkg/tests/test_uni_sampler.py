from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from tvssv.diagnostics import batch_means_se
from tvssv.errors import ConfigError, DomainError, NumericalError
from tvssv.forecast import simulate_predictive
from tvssv.skewdist import SkewNormal, SkewT, skew_params
from tvssv.uni_sampler import (
    McmcConfig,
    UniModelSpec,
    UniPriorSpec,
    draw_initial_state,
    draw_mixing_o,
    draw_mixing_v,
    draw_phi,
    draw_pi,
    draw_sigma2,
    gaussian_regression_draw,
    ig_posterior,
    initial_state_moments,
    o_log_accept,
    o_proposal_params,
    run_chain,
    simulate_model,
    v_mean,
)


class TestMixingV:
    def test_symmetric_shape_gives_half_normal(self, rng):
        n = 10**6
        v = draw_mixing_v(rng.standard_normal(n), np.ones(n), np.zeros(n), np.ones(n), math.inf, rng)
        assert abs(v.mean() - math.sqrt(2 / math.pi)) < 3 * v.std() / 1000

    def test_mean_parameter_at_zero_residual(self):
        lam, h = 1.3, 2.0
        zeta, omega, delta = (float(a) for a in skew_params(lam))
        assert float(v_mean(0.0, h, lam, 1.0, math.inf)) == pytest.approx(-delta * zeta / omega, abs=1e-14)
        # a residual equal to the shock location leaves no information in the mean
        assert float(v_mean(zeta * math.sqrt(h), h, lam, 1.0, math.inf)) == pytest.approx(0.0, abs=1e-14)

    def test_truncated_variance(self, rng):
        lam = 0.8 / 0.6  # delta = 0.8
        n = 400_000
        r = np.full(n, 0.3)
        v = draw_mixing_v(r, np.ones(n), np.full(n, lam), np.ones(n), math.inf, rng)
        m = float(v_mean(0.3, 1.0, lam, 1.0, math.inf))
        ref = stats.truncnorm(-m / 0.6, np.inf, loc=m, scale=0.6)
        assert v.var() == pytest.approx(ref.var(), rel=0.01)
        assert np.all(v >= 0)


class TestMixingO:
    def test_zero_v_always_accepts(self):
        assert float(o_log_accept(0.4, 1.0, 2.0, 0.0, 0.7, 1.9, 5.0)) == 0.0

    def test_same_value_always_accepts(self):
        assert float(o_log_accept(0.4, 1.0, 2.0, 0.5, 0.7, 0.7, 5.0)) == 0.0

    def test_symmetric_shape_is_exact_gamma(self, rng):
        r, h, nu = 0.9, 1.5, 5.0
        shape, rate = o_proposal_params(r, h, 0.0, nu)
        omega2 = 0.6
        assert rate == pytest.approx(0.5 * (nu + r * r / (h * omega2)))
        n = 100_000
        o = np.ones(1)
        draws = np.empty(n)
        for i in range(n):
            o, _ = draw_mixing_o(np.array([r]), np.array([h]), np.zeros(1), np.array([0.7]), o, nu, rng)
            draws[i] = o[0]
        assert stats.kstest(draws, stats.gamma(shape, scale=1 / rate).cdf).pvalue > 0.01

    def test_rejection_keeps_previous(self, rng):
        # a huge negative acceptance exponent forces rejection
        o, acc = draw_mixing_o(np.array([50.0]), np.array([1.0]), np.array([5.0]), np.array([40.0]),
                               np.array([1e-4]), 5.0, rng)
        if not acc[0]:
            assert o[0] == 1e-4


class TestPi:
    def test_single_observation_hand_update(self, rng):
        Z = np.ones((1, 1))
        draws = np.array([gaussian_regression_draw(Z, np.array([2.0]), np.ones(1), np.zeros(1), np.eye(1), rng)[0]
                          for _ in range(200_000)])
        assert draws.mean() == pytest.approx(1.0, abs=0.01)
        assert draws.var() == pytest.approx(0.5, rel=0.02)

    def test_dominating_prior(self, rng):
        prior = UniPriorSpec(np.array([0.3, -0.2]), np.eye(2) * 1e-14)
        X = rng.standard_normal((50, 2))
        y = X @ [5.0, 5.0]
        n = 50
        d = draw_pi(y, X, np.ones(n), np.zeros(n), np.ones(n), np.ones(n), math.inf, prior, rng)
        np.testing.assert_allclose(d, [0.3, -0.2], atol=1e-5)

    def test_textbook_regression(self, rng):
        n, p = 60, 3
        X = rng.standard_normal((n, p))
        y = X @ [1.0, -0.5, 0.2] + rng.standard_normal(n)
        prior = UniPriorSpec(np.zeros(p), 4.0 * np.eye(p))
        # lambda = 0, h = 1: the skew adjustment vanishes except for the v-term, which has delta = 0
        v = np.abs(rng.standard_normal(n))
        P = X.T @ X + np.eye(p) / 4.0
        mean = np.linalg.solve(P, X.T @ y)
        cov = np.linalg.inv(P)
        m = 40_000
        draws = np.array([draw_pi(y, X, np.ones(n), np.zeros(n), v, np.ones(n), math.inf, prior, rng)
                          for _ in range(m)])
        se = np.sqrt(np.diag(cov) / m)
        assert np.all(np.abs(draws.mean(axis=0) - mean) < 4 * se)
        np.testing.assert_allclose(np.cov(draws.T), cov, atol=0.05 * np.max(np.diag(cov)))

    def test_non_positive_variance_raises(self, rng):
        prior = UniPriorSpec(np.zeros(1), np.eye(1))
        with pytest.raises(NumericalError):
            draw_pi(np.ones(3), np.ones((3, 1)), np.array([1.0, 0.0, 1.0]), np.zeros(3), np.zeros(3), np.ones(3),
                    math.inf, prior, rng)


class TestStateParameters:
    def test_phi_prior_draw_for_empty_path(self, rng):
        d = np.array([draw_phi(np.zeros(0), 0.0, None, 1.0, [1.0], [0.01], rng)[0] for _ in range(50_000)])
        assert d.mean() == pytest.approx(1.0, abs=0.003)
        assert d.var() == pytest.approx(0.01, rel=0.03)

    def test_phi_consistency(self, rng):
        T, phi, s2 = 10_000, 0.9, 0.04
        path = np.zeros(T)
        prev = 0.0
        for t in range(T):
            prev = phi * prev + math.sqrt(s2) * rng.standard_normal()
            path[t] = prev
        d = np.array([draw_phi(path, 0.0, None, s2, [0.0], [1e6], rng)[0] for _ in range(500)])
        assert abs(d.mean() - 0.9) < 0.02

    def test_phi_flat_likelihood_returns_prior(self, rng):
        path = rng.standard_normal(30)
        d = np.array([draw_phi(path, 0.0, None, 1e12, [1.0], [0.01], rng)[0] for _ in range(50_000)])
        assert d.mean() == pytest.approx(1.0, abs=0.003)
        assert d.var() == pytest.approx(0.01, rel=0.03)

    def test_phi_with_exogenous_regressor(self, rng):
        T = 5000
        exo = rng.standard_normal((T, 1))
        path = np.zeros(T)
        prev = 0.0
        for t in range(T):
            prev = 0.8 * prev - 0.3 * exo[t, 0] + 0.1 * rng.standard_normal()
            path[t] = prev
        d = draw_phi(path, 0.0, exo, 0.01, [0.0, 0.0], [100.0, 100.0], rng)
        np.testing.assert_allclose(d, [0.8, -0.3], atol=0.02)

    def test_ig_update_zero_residuals(self):
        assert ig_posterior(np.zeros(12), 5.0, 0.16) == (11.0, 0.16)

    def test_ig_update_hand_case(self):
        resid = np.full(10, math.sqrt(0.2))  # sum of squares 2
        a, b = ig_posterior(resid, 5.0, 0.16)
        assert a == 10.0
        assert b == pytest.approx(1.16, abs=1e-14)

    def test_sigma2_positive_and_correct_law(self, rng):
        path = np.full(10, 0.0)
        d = np.array([draw_sigma2(path, 0.0, [0.5], None, 5.0, 0.16, rng) for _ in range(200_000)])
        assert np.all(d > 0)
        # IG(10, 0.16) mean = 0.16 / 9
        assert d.mean() == pytest.approx(0.16 / 9, rel=0.01)

    def test_initial_state_midpoint(self):
        m, v = initial_state_moments(2.0, 0.0, 1.0, 0.5, 0.0, 0.5)
        assert m == pytest.approx(1.0)
        assert v == pytest.approx(0.25)

    def test_initial_state_tight_prior(self, rng):
        assert draw_initial_state(5.0, 0.0, 0.9, 0.1, -1.0, 1e-14, rng) == pytest.approx(-1.0, abs=1e-5)

    def test_initial_state_consistent_signal(self):
        m, _ = initial_state_moments(0.9 * 3.0, 0.0, 0.9, 0.2, 3.0, 7.0)
        assert m == pytest.approx(3.0, abs=1e-12)

    def test_initial_state_phi_zero_is_prior(self, rng):
        d = np.array([draw_initial_state(100.0, 0.0, 0.0, 0.1, 2.0, 4.0, rng) for _ in range(50_000)])
        assert d.mean() == pytest.approx(2.0, abs=0.03)
        assert d.var() == pytest.approx(4.0, rel=0.03)


def _small_model(rng, family=SkewNormal(), T=80):
    X = np.column_stack([np.ones(T), rng.standard_normal(T)])
    y, _ = simulate_model(T, X, [0.5, 1.0], 0.9, 0.05, 0.95, 0.02, family, rng)
    prior = UniPriorSpec(np.zeros(2), 10 * np.eye(2))
    return UniModelSpec(y, X, family), prior


class TestChain:
    def test_iters_must_exceed_burn_in(self):
        with pytest.raises(ConfigError):
            McmcConfig(iters=100, burn_in=100)

    def test_short_sample_rejected(self, rng):
        model, prior = _small_model(rng, T=11)
        with pytest.raises(DomainError):
            run_chain(model, prior, McmcConfig(iters=20, burn_in=10))

    @pytest.mark.parametrize("method", ["pgas", "mh"])
    def test_reproducible_and_valid(self, method, rng):
        model, prior = _small_model(rng, SkewT(5.0))
        cfg = McmcConfig(iters=60, burn_in=20, path_method=method, seed=11)
        a = run_chain(model, prior, cfg, rng=np.random.default_rng(11))
        b = run_chain(model, prior, cfg, rng=np.random.default_rng(11))
        for k in a.arrays:
            np.testing.assert_array_equal(a[k], b[k])
        assert a.n_draws == 40
        assert np.all(a["sig_eta"] > 0) and np.all(a["sig_xi"] > 0)
        assert np.all(np.isfinite(a["log_h"]))
        assert np.all(a["v"] >= 0) and np.all(a["o"] > 0)

    def test_thinning(self, rng):
        model, prior = _small_model(rng)
        d = run_chain(model, prior, McmcConfig(iters=50, burn_in=10, thin=4), rng=rng)
        assert d.n_draws == 10

    def test_constant_shape_reduces_to_symmetric_sv(self, rng):
        """With the shape pinned at zero the one-step predictive is symmetric."""
        T = 120
        X = np.ones((T, 1))
        y, _ = simulate_model(T, X, [0.0], 0.9, 0.05, 0.95, 1e-12, SkewNormal(), rng)
        prior = UniPriorSpec(np.zeros(1), np.eye(1), phi_lam_mean=[1.0], phi_lam_var=[1e-10],
                             sig_xi=(1e6, 1e-6), lam0_mean=0.0, lam0_var=1e-10)
        model = UniModelSpec(y, X, SkewNormal())
        draws = run_chain(model, prior, McmcConfig(iters=1500, burn_in=500), rng=rng)
        assert np.max(np.abs(draws["lam"])) < 1e-3
        pd_ = simulate_predictive(draws, model, 1, rng, fanout=20)[0]
        x = pd_.draws
        z = (x - x.mean()) / x.std()
        # third standardized moment with a batch-means standard error over the ordered draws
        third = z**3
        assert abs(third.mean()) < 3 * batch_means_se(third)
