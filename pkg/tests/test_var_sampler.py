from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from tvssv.errors import ConfigError, DomainError
from tvssv.skewdist import SkewNormal
from tvssv.uni_sampler import McmcConfig, StatePrior, UniState
from tvssv.var_sampler import (
    VarModelSpec,
    VarPriorSpec,
    VarState,
    draw_A,
    draw_Pi,
    lagged_regressors,
    run_var_chain,
    simulate_var_data,
    unitriangular,
)


def _flat_state(N, T, log_h=0.0):
    eq = [UniState(np.zeros(0), np.array([1.0]), np.array([1.0]), 0.01, 0.01, np.full(T, log_h), log_h,
                   np.zeros(T), 0.0, np.zeros(T), np.ones(T)) for _ in range(N)]
    return eq


def _prior(N, k, var=100.0, mean=0.0):
    return VarPriorSpec(np.full((N, k), mean), np.full((N, k), var), [StatePrior() for _ in range(N)])


def test_unitriangular_structure():
    A = unitriangular([np.zeros(0), np.array([0.3]), np.array([-1.0, 2.0])])
    np.testing.assert_array_equal(np.diag(A), 1.0)
    assert np.all(np.triu(A, 1) == 0)
    assert A[2, 0] == -1.0 and A[2, 1] == 2.0


def test_lagged_regressor_rows():
    Y = np.arange(10.0).reshape(5, 2)
    pre = np.array([[-4.0, -3.0], [-2.0, -1.0]])
    X = lagged_regressors(Y, pre, 2)
    np.testing.assert_array_equal(X[0], [1, -2, -1, -4, -3])
    np.testing.assert_array_equal(X[3], [1, 4, 5, 2, 3])


def test_a_prior_when_residuals_carry_no_information(rng):
    T, N = 50, 3
    st = VarState(np.zeros((N, 1)), np.eye(N), _flat_state(N, T))
    prior = _prior(N, 1)
    draws = np.array([draw_A(np.zeros((T, N)), st, math.inf, prior, rng)[2, :2] for _ in range(20_000)])
    assert abs(draws.mean()) < 4 * 10 / math.sqrt(draws.size)
    assert draws.var() == pytest.approx(100.0, rel=0.03)


def test_a_recovery_from_residuals(rng):
    T = 10_000
    A = np.array([[1.0, 0.0], [0.5, 1.0]])
    E = rng.standard_normal((T, 2))
    U = np.linalg.solve(A, E.T).T
    st = VarState(np.zeros((2, 1)), np.eye(2), _flat_state(2, T))
    d = np.array([draw_A(U, st, math.inf, _prior(2, 1), rng)[1, 0] for _ in range(200)])
    assert abs(d.mean() - 0.5) < 0.03


def test_pi_dominant_prior(rng):
    T, N, p = 40, 2, 1
    Y = rng.standard_normal((T, N))
    model = VarModelSpec(Y, np.zeros((p, N)), p)
    prior = _prior(N, model.k, var=1e-14, mean=0.25)
    st = VarState(np.zeros((N, model.k)), np.array([[1, 0], [0.7, 1.0]]), _flat_state(N, T))
    np.testing.assert_allclose(draw_Pi(model, st, prior, rng), 0.25, atol=1e-5)


def test_pi_single_equation_matches_regression(rng):
    """With N = 1 the joint draw is the weighted-regression posterior."""
    T = 200
    y = np.zeros(T + 1)
    for t in range(1, T + 1):
        y[t] = 0.2 + 0.6 * y[t - 1] + 0.5 * rng.standard_normal()
    model = VarModelSpec(y[1:, None], y[:1, None], 1)
    log_h = math.log(0.25)
    st = VarState(np.zeros((1, 2)), np.eye(1), _flat_state(1, T, log_h))
    prior = _prior(1, 2, var=10.0)
    X = model.X
    P = X.T @ X / 0.25 + np.eye(2) / 10.0
    mean = np.linalg.solve(P, X.T @ model.Y[:, 0] / 0.25)
    m = 20_000
    d = np.array([draw_Pi(model, st, prior, rng)[0] for _ in range(m)])
    cov = np.linalg.inv(P)
    assert np.all(np.abs(d.mean(axis=0) - mean) < 4 * np.sqrt(np.diag(cov) / m))
    np.testing.assert_allclose(d.var(axis=0), np.diag(cov), rtol=0.05)


def test_model_validation():
    with pytest.raises(DomainError):
        VarModelSpec(np.zeros((10, 2)), np.zeros((2, 2)), 1)
    with pytest.raises(DomainError):
        VarModelSpec(np.zeros((10, 2)), np.zeros((1, 2)), 0)


def test_prior_validation():
    with pytest.raises(ConfigError):
        VarPriorSpec(np.zeros((2, 3)), np.zeros((2, 3)), [StatePrior(), StatePrior()])
    with pytest.raises(ConfigError):
        VarPriorSpec(np.zeros((2, 3)), np.ones((2, 3)), [StatePrior()])


def test_short_sample_rejected(rng):
    model = VarModelSpec(rng.standard_normal((5, 2)), np.zeros((2, 2)), 2)
    with pytest.raises(DomainError):
        run_var_chain(model, _prior(2, model.k), McmcConfig(iters=10, burn_in=5))


def _simulated_var(rng, T=600):
    N = 2
    Pi = np.array([[0.3, 0.5, 0.0], [0.0, 0.2, 0.4]])
    A = np.array([[1.0, 0.0], [0.5, 1.0]])
    st = VarState(Pi, A, _flat_state(N, T, math.log(0.5)))
    Y = simulate_var_data(st, np.zeros((1, N)), 1, math.inf, rng)
    return VarModelSpec(Y, np.zeros((1, N)), 1, SkewNormal()), Pi, A


def test_chain_recovers_contemporaneous_coefficient(rng):
    model, Pi, A = _simulated_var(rng)
    d = run_var_chain(model, _prior(2, model.k), McmcConfig(iters=800, burn_in=300), rng=rng)
    assert d["A"].shape == (500, 2, 2)
    np.testing.assert_array_equal(d["A"][:, 0, 1], 0.0)
    np.testing.assert_array_equal(d["A"][:, [0, 1], [0, 1]], 1.0)
    a21 = d["A"][:, 1, 0]
    U = model.Y - model.X @ Pi.T
    # regression of u2 on -u1 at the true coefficients: the sample counterpart of a21
    ols = float(np.linalg.lstsq(-U[:, :1], U[:, 1], rcond=None)[0][0])
    assert abs(a21.mean() - ols) < 0.5 * a21.std()
    assert abs(a21.mean() - 0.5) < 4 * a21.std()
    np.testing.assert_allclose(d["Pi"].mean(axis=0), Pi, atol=0.12)
    assert d["log_h"].shape == (500, 2, model.T)


def test_chain_reproducible(rng):
    model, *_ = _simulated_var(rng, T=60)
    cfg = McmcConfig(iters=30, burn_in=10)
    a = run_var_chain(model, _prior(2, model.k), cfg, rng=np.random.default_rng(3))
    b = run_var_chain(model, _prior(2, model.k), cfg, rng=np.random.default_rng(3))
    for k in a.arrays:
        np.testing.assert_array_equal(a[k], b[k])


def test_simulated_shocks_have_unit_variance(rng):
    """Structural shocks built from v, o and z are standardized for any shape."""
    T = 200_000
    eq = _flat_state(1, T)
    eq[0].lam[:] = -2.0
    st = VarState(np.zeros((1, 2)), np.eye(1), eq)
    Y = simulate_var_data(st, np.zeros((1, 1)), 1, math.inf, rng)[:, 0]
    assert abs(Y.mean()) < 4 / math.sqrt(T)
    assert Y.var() == pytest.approx(1.0, abs=0.015)
    assert stats.skew(Y) < 0
