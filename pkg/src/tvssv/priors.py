"""Prior construction: Minnesota variances and data-based scale estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import CONST, LaggedDesign
from .errors import DataError
from .uni_sampler import StatePrior, UniPriorSpec


@dataclass(frozen=True)
class MinnesotaHyper:
    theta1: float = 0.04
    theta2: float = 0.025
    theta3: float = 100.0
    theta4: float = 2.0

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3", "theta4"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def minnesota_variances(hyper: MinnesotaHyper, sigma2_by_var, N: int, p: int) -> np.ndarray:
    """Prior variances as an (N, 1 + N p) array, rows = equations.

    Column 0 is the intercept (theta3); column 1 + (l-1) N + j is variable j at lag l.
    """
    s2 = np.asarray(sigma2_by_var, dtype=float)
    if s2.shape != (N,) or np.any(s2 <= 0):
        raise ValueError("sigma2_by_var must be N positive values")
    out = np.empty((N, 1 + N * p))
    out[:, 0] = hyper.theta3
    for l in range(1, p + 1):
        decay = l**hyper.theta4
        block = hyper.theta1 * hyper.theta2 * s2[:, None] / (s2[None, :] * decay)
        block[np.diag_indices(N)] = hyper.theta1 / decay
        out[:, 1 + (l - 1) * N : 1 + l * N] = block
    return out


def minnesota_cov(hyper: MinnesotaHyper, sigma2_by_var, N: int, p: int) -> np.ndarray:
    """Diagonal covariance of vec(Pi') (equation-major)."""
    return np.diag(minnesota_variances(hyper, sigma2_by_var, N, p).reshape(-1))


def minnesota_means(N: int, p: int, own_lag_center=None) -> np.ndarray:
    """Prior means: zero except the first own lag, centered per variable (0 or 1)."""
    out = np.zeros((N, 1 + N * p))
    if own_lag_center is not None:
        c = np.broadcast_to(np.asarray(own_lag_center, dtype=float), (N,))
        out[np.arange(N), 1 + np.arange(N)] = c
    return out


def ar_residual_variance(x, lags: int) -> float:
    """OLS residual variance (SSR / (n - k)) of an AR(lags) with intercept."""
    x = np.asarray(x, dtype=float)
    n = x.size - lags
    k = lags + 1
    if n <= k:
        raise DataError(f"insufficient data for an AR({lags}) fit: {x.size} observations")
    Z = np.column_stack([np.ones(n)] + [x[lags - l : lags - l + n] for l in range(1, lags + 1)])
    target = x[lags:]
    beta, *_ = np.linalg.lstsq(Z, target, rcond=None)
    resid = target - Z @ beta
    s2 = float(resid @ resid) / (n - k)
    if not s2 > 1e-12 * max(1.0, float(np.var(x))):
        raise DataError("degenerate series: zero residual variance")
    return s2


def estimate_scales(data, lags: int = 12) -> np.ndarray:
    """Residual variances of univariate AR(lags) fits, one per column."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    return np.array([ar_residual_variance(data[:, j], lags) for j in range(data.shape[1])])


def initial_logvol_mean(x, lags: int = 4, window: int = 40) -> float:
    """Log residual variance of an AR(lags) on the first ``window`` observations."""
    x = np.asarray(x, dtype=float)
    return math.log(ar_residual_variance(x[: min(window, x.size)], lags))


def _scale_or_fallback(x, lags):
    x = np.asarray(x, dtype=float)
    use = min(lags, max(1, (x.size - 3) // 3))
    return ar_residual_variance(x, use)


def univariate_pi_variances(
    design: LaggedDesign,
    target: str,
    series: dict,
    hyper: MinnesotaHyper = MinnesotaHyper(),
    scale_lags: int = 12,
) -> np.ndarray:
    """Minnesota variances for a single equation described by a lagged design.

    Own lags get theta1 / l^theta4, other regressors the cross-variable formula
    with scales from AR fits, the intercept theta3.
    """
    scales = {}

    def scale(name):
        if name not in scales:
            scales[name] = _scale_or_fallback(series[name], scale_lags)
        return scales[name]

    out = np.empty(design.width)
    for j, (src, lag) in enumerate(design.terms):
        if src == CONST:
            out[j] = hyper.theta3
        elif src == target:
            out[j] = hyper.theta1 / lag**hyper.theta4
        else:
            out[j] = hyper.theta1 * hyper.theta2 * scale(target) / (scale(src) * lag**hyper.theta4)
    return out


def default_state_prior(log_h0_mean: float = 0.0, k_vol: int = 0, k_shape: int = 0) -> StatePrior:
    """Default state-equation priors: phi ~ N(1, 0.01), exogenous coefficients ~ N(0, 10),
    innovation variances ~ IG(5, 0.16), log h0 ~ N(m, 100), lambda0 ~ N(0, 10)."""
    return StatePrior(
        phi_h_mean=np.r_[1.0, np.zeros(k_vol)],
        phi_h_var=np.r_[0.01, np.full(k_vol, 10.0)],
        phi_lam_mean=np.r_[1.0, np.zeros(k_shape)],
        phi_lam_var=np.r_[0.01, np.full(k_shape, 10.0)],
        sig_eta=(5.0, 0.16),
        sig_xi=(5.0, 0.16),
        h0_mean=log_h0_mean,
        h0_var=100.0,
        lam0_mean=0.0,
        lam0_var=10.0,
    )


def default_uni_prior(
    design: LaggedDesign,
    target: str,
    series: dict,
    k_vol: int = 0,
    k_shape: int = 0,
    hyper: MinnesotaHyper = MinnesotaHyper(),
    own_lag_center: float = 0.0,
) -> UniPriorSpec:
    var = univariate_pi_variances(design, target, series, hyper)
    mean = np.zeros(design.width)
    for j, (src, lag) in enumerate(design.terms):
        if src == target and lag == 1:
            mean[j] = own_lag_center
    sp = default_state_prior(initial_logvol_mean(series[target]), k_vol, k_shape)
    return UniPriorSpec(pi_mean=mean, pi_cov=np.diag(var), **sp.__dict__)
