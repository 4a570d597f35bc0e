"""Two-step quantile-regression baseline: linear quantile regressions on a
tau grid, then a free Skew-t matched to a subset of the fitted quantiles."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DataError, NumericalError
from .skewdist import FreeSkewT

DEFAULT_TAU_GRID = np.round(np.arange(0.05, 0.951, 0.05), 2)
MATCH_TAUS = (0.05, 0.25, 0.75, 0.95)
NU_BOUNDS = (2.1, 100.0)


def check_loss(r, tau: float):
    r = np.asarray(r, dtype=float)
    return r * (tau - (r < 0))


def _objective(X, y, beta, tau):
    return float(np.sum(check_loss(y - X @ beta, tau)))


def quantile_regression(X, y, tau: float, tol: float = 1e-10, max_iter: int = 1000) -> np.ndarray:
    """Minimize sum rho_tau(y - X beta).

    Iteratively reweighted least squares on a smoothed check loss whose
    smoothing is annealed down to 1e-10, followed by a vertex polish that solves
    the interpolation system on the p observations with the smallest residuals.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n <= p:
        raise DataError(f"need more observations ({n}) than regressors ({p})")
    if np.linalg.matrix_rank(X) < p:
        raise DataError("regressor matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ beta
    eps = max(float(np.median(np.abs(r - np.median(r)))), 1e-8) * 1e-2
    for _ in range(max_iter):
        r = y - X @ beta
        w = np.where(r >= 0, tau, 1.0 - tau) / np.maximum(np.abs(r), eps)
        sw = np.sqrt(w)
        new, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
        step = float(np.max(np.abs(new - beta)))
        beta = new
        if step < tol * (1.0 + float(np.max(np.abs(beta)))):
            if eps <= 1e-10:
                break
            eps = max(eps * 0.1, 1e-10)
    return _polish(X, y, beta, tau)


def _polish(X, y, beta, tau):
    p = X.shape[1]
    best, best_obj = beta, _objective(X, y, beta, tau)
    r = np.abs(y - X @ beta)
    order = np.argsort(r)
    # try the p closest points, then swap in the next few if singular
    for extra in range(0, min(5, X.shape[0] - p) + 1):
        idx = np.concatenate([order[: p - 1], order[p - 1 + extra : p + extra]]) if extra else order[:p]
        XB = X[idx]
        if np.linalg.matrix_rank(XB) < p:
            continue
        cand = np.linalg.solve(XB, y[idx])
        obj = _objective(X, y, cand, tau)
        if obj <= best_obj + 1e-12 * max(1.0, abs(best_obj)):
            best, best_obj = cand, obj
        break
    return best


@dataclass
class QrFit:
    tau_grid: np.ndarray
    betas: np.ndarray

    def quantiles(self, x_row) -> dict[float, float]:
        vals = self.betas @ np.asarray(x_row, dtype=float)
        return {float(t): float(v) for t, v in zip(self.tau_grid, vals)}

    def fitted_quantiles(self, X) -> np.ndarray:
        """(n, |grid|) fitted quantiles for each row of X."""
        return np.asarray(X, dtype=float) @ self.betas.T

    def crossing_rows(self, X) -> np.ndarray:
        q = self.fitted_quantiles(X)
        return np.nonzero(np.any(np.diff(q, axis=1) < 0, axis=1))[0]


def fit_quantile_regression(X, y, tau_grid=DEFAULT_TAU_GRID) -> QrFit:
    grid = np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] >= 1:
        raise DataError("tau grid must be strictly increasing inside (0, 1)")
    betas = np.vstack([quantile_regression(X, y, t) for t in grid])
    return QrFit(grid, betas)


# ---------------------------------------------------------------------------
# Skew-t interpolation


class InterpolationError(NumericalError):
    def __init__(self, message: str, best: FreeSkewT, objective: float):
        super().__init__(message)
        self.best = best
        self.objective = objective


@dataclass
class SkewTFit:
    density: FreeSkewT
    objective: float
    iterations: int
    taus: np.ndarray
    targets: np.ndarray
    fitted: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def rms(self) -> float:
        return math.sqrt(self.objective / self.taus.size)


def _unpack(theta):
    loc, log_scale, shape, df = theta
    return FreeSkewT(float(loc), math.exp(log_scale), float(shape), float(df))


def _starting_point(taus, q):
    med = np.interp(0.5, taus, q)
    lo = np.interp(0.25, taus, q)
    hi = np.interp(0.75, taus, q)
    iqr = max(hi - lo, 1e-6)
    outer_lo = q[0]
    outer_hi = q[-1]
    span = max(outer_hi - outer_lo, 1e-6)
    skew = ((outer_hi - med) - (med - outer_lo)) / span
    shape = float(np.clip(4.0 * skew, -3.0, 3.0))
    return np.array([med, math.log(iqr / 1.349), shape, 10.0])


def interpolate_skew_t(quantiles: dict, taus=MATCH_TAUS, max_iter: int = 2000) -> SkewTFit:
    """Least-squares match of a free Skew-t's quantiles to target quantiles.

    Nelder-Mead from a quantile-based start with the degrees of freedom boxed
    to [2.1, 100].  Raises :class:`InterpolationError` (carrying the best point)
    when the simplex search does not converge within ``max_iter`` iterations.
    """
    taus = np.asarray([t for t in taus if t in quantiles] if taus is not None else sorted(quantiles), float)
    if taus.size < 4:
        raise DataError("need at least four target quantiles")
    q = np.array([quantiles[float(t)] for t in taus])

    def obj(theta):
        d = _unpack(theta)
        return float(np.sum((q - d.ppf(taus)) ** 2))

    x0 = _starting_point(taus, q)
    bounds = [(None, None), (None, None), (None, None), NU_BOUNDS]
    res = optimize.minimize(
        obj, x0, method="Nelder-Mead", bounds=bounds,
        options={"maxiter": max_iter, "maxfev": 4 * max_iter, "xatol": 1e-8, "fatol": 1e-14},
    )
    best = _unpack(res.x)
    if not res.success:
        raise InterpolationError(f"Skew-t interpolation did not converge: {res.message}", best, float(res.fun))
    fit = SkewTFit(best, float(res.fun), int(res.nit), taus, q, best.ppf(taus))
    if fit.rms > 1e-2:
        warnings.warn(f"Skew-t interpolation RMS quantile error {fit.rms:.3g} exceeds 1e-2", stacklevel=2)
    return fit


@dataclass
class BaselineForecast:
    """Predictive density of the two-step baseline: analytic Skew-t plus draws."""

    density: FreeSkewT
    draws: np.ndarray
    origin: object = None
    horizon: int = 1
    fit: SkewTFit | None = None

    def logpdf(self, y) -> float:
        return float(self.density.logpdf(y))


def baseline_forecast(X, y, x_next, rng: np.random.Generator, n_draws: int = 5000,
                      tau_grid=DEFAULT_TAU_GRID, match=MATCH_TAUS, origin=None, horizon: int = 1) -> BaselineForecast:
    fit = fit_quantile_regression(X, y, tau_grid)
    targets = fit.quantiles(x_next)
    # crossing quantiles are kept as fitted; the interpolation sees them as-is
    sk = interpolate_skew_t(targets, match)
    return BaselineForecast(sk.density, sk.density.sample(rng, n_draws), origin, horizon, sk)
