"""Predictive densities from posterior draws and tail-risk functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .design import CONST, LaggedDesign
from .draws import PosteriorDraws
from .errors import DomainError
from .skewdist import draw_mixing, standard_logpdf
from .uni_sampler import UniModelSpec
from .var_sampler import VarModelSpec


@dataclass
class PredictiveDensity:
    """Simulated outcomes plus one analytic shock component per draw.

    Component m is the law of ``loc[m] + scale[m] * eps`` with eps a standardized
    skew shock of shape ``shape[m]`` and degrees of freedom ``nu`` (inf for the
    Skew-Normal); the predictive density is their equal-weight mixture.
    """

    origin: object
    horizon: int
    draws: np.ndarray
    loc: np.ndarray | None = None
    scale: np.ndarray | None = None
    shape: np.ndarray | None = None
    nu: float = math.inf
    variable: str = "y"
    realized: float = math.nan
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.loc is not None:
            self.loc = np.asarray(self.loc, dtype=float)
            self.scale = np.asarray(self.scale, dtype=float)
            self.shape = np.asarray(self.shape, dtype=float)
            if not (self.loc.shape == self.scale.shape == self.shape.shape):
                raise DomainError("mixture components have inconsistent sizes")

    @property
    def has_components(self) -> bool:
        return self.loc is not None

    def logpdf(self, y) -> float:
        """Log of the Rao-Blackwellized mixture density at y."""
        if not self.has_components:
            raise DomainError("predictive density has no analytic components")
        z = (float(y) - self.loc) / self.scale
        lp = standard_logpdf(z, self.shape, self.nu) - np.log(self.scale)
        return float(logsumexp(lp) - math.log(lp.size))


def gar_quantile(pd: PredictiveDensity | np.ndarray, tau: float) -> float:
    """Empirical quantile by linear interpolation of order statistics (type 7)."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    x = pd.draws if isinstance(pd, PredictiveDensity) else np.asarray(pd, dtype=float)
    return float(np.quantile(x, tau))


def expected_shortfall(pd: PredictiveDensity | np.ndarray, tau: float) -> float:
    x = pd.draws if isinstance(pd, PredictiveDensity) else np.asarray(pd, dtype=float)
    q = gar_quantile(x, tau)
    tail = x[x <= q]
    return float(tail.mean()) if tail.size else q


def recession_prob(pd: PredictiveDensity | np.ndarray) -> float:
    x = pd.draws if isinstance(pd, PredictiveDensity) else np.asarray(pd, dtype=float)
    return float(np.mean(x < 0.0))


# ---------------------------------------------------------------------------
# univariate


def _design_rows(design: LaggedDesign, series: dict, target: str, sim: np.ndarray, n_obs: int, step: int):
    """Regressor rows (M, width) for forecast step ``step`` (1-based) past ``n_obs`` periods.

    ``sim`` holds simulated target values (M, step-1); other sources are held
    at their last observed value.
    """
    M = sim.shape[0]
    t = n_obs - 1 + step
    out = np.empty((M, design.width))
    for j, (src, lag) in enumerate(design.terms):
        idx = t - lag
        if src == CONST:
            out[:, j] = 1.0
        elif src == target and idx >= n_obs:
            out[:, j] = sim[:, idx - n_obs]
        else:
            x = np.asarray(series[src], dtype=float)
            out[:, j] = x[min(idx, x.size - 1)]
    return out


def _future_rows(design, matrix, series, target, sim, n_obs, step, M):
    if matrix is None:
        return None
    if design is not None and series is not None:
        return _design_rows(design, series, target, sim, n_obs, step)
    return np.broadcast_to(matrix[-1], (M, matrix.shape[1]))


def simulate_predictive(
    draws: PosteriorDraws,
    model: UniModelSpec,
    horizon: int,
    rng: np.random.Generator,
    origin=None,
    fanout: int = 1,
) -> list[PredictiveDensity]:
    """Simulate the predictive distribution at horizons 1..H from a univariate fit.

    Each retained draw propagates the state equations forward, draws the shock
    from its constrained distribution and builds y.  Future regressor rows come
    from the model's lagged designs (simulated own lags, exogenous series held at
    their last value); without designs the last in-sample row is held.

    Returns one :class:`PredictiveDensity` per horizon with M = draws x fanout.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    nu = model.nu
    rep = lambda a: np.repeat(np.asarray(a), fanout, axis=0)
    pi = rep(draws["pi"])
    phi_h = rep(draws["phi_h"])
    phi_l = rep(draws["phi_lam"])
    sig_eta = rep(draws["sig_eta"])
    sig_xi = rep(draws["sig_xi"])
    log_h = rep(draws["log_h"][:, -1])
    lam = rep(draws["lam"][:, -1])
    M = pi.shape[0]
    series = model.series
    n_obs = None
    if series is not None:
        n_obs = np.asarray(series[model.target]).size
    sim = np.empty((M, 0))
    out = []
    for step in range(1, horizon + 1):
        x = _future_rows(model.x_design, model.X, series, model.target, sim, n_obs, step, M)
        mean = np.einsum("mk,mk->m", x, pi) if x is not None else np.zeros(M)
        zv = _future_rows(model.vol_design, model.vol_exo, series, model.target, sim, n_obs, step, M)
        zl = _future_rows(model.shape_design, model.shape_exo, series, model.target, sim, n_obs, step, M)
        log_h = phi_h[:, 0] * log_h + np.sqrt(sig_eta) * rng.standard_normal(M)
        if zv is not None:
            log_h = log_h + np.einsum("mk,mk->m", zv, phi_h[:, 1:])
        lam = phi_l[:, 0] * lam + np.sqrt(sig_xi) * rng.standard_normal(M)
        if zl is not None:
            lam = lam + np.einsum("mk,mk->m", zl, phi_l[:, 1:])
        eps = draw_mixing(lam, nu, rng)[3]
        scale = np.exp(0.5 * log_h)
        y = mean + scale * eps
        out.append(PredictiveDensity(origin, step, y, mean, scale, lam.copy(), nu, model.target))
        sim = np.column_stack([sim, y])
    return out


# ---------------------------------------------------------------------------
# VAR


def simulate_var_predictive(
    draws: PosteriorDraws,
    model: VarModelSpec,
    horizon: int,
    rng: np.random.Generator,
    origin=None,
    fanout: int = 1,
) -> dict[str, list[PredictiveDensity]]:
    """Simulate the VAR forward; returns, per variable, one density per horizon.

    Components for variable i condition on the simulated shocks of the other
    equations: y_i = (Pi X)_i + sum_{j != i} (A^-1)_{ij} e_j + sqrt(h_i) eps_i.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    nu = model.nu
    rep = lambda a: np.repeat(np.asarray(a), fanout, axis=0)
    Pi = rep(draws["Pi"])
    A = rep(draws["A"])
    phi_h = rep(draws["phi_h"])
    phi_l = rep(draws["phi_lam"])
    sig_eta = rep(draws["sig_eta"])
    sig_xi = rep(draws["sig_xi"])
    log_h = rep(draws["log_h"][:, :, -1])
    lam = rep(draws["lam"][:, :, -1])
    M, N = log_h.shape
    p = model.lags
    Ainv = np.linalg.inv(A)
    hist = np.vstack([model.presample, model.Y])  # (n, N)
    n = hist.shape[0]
    sim = np.empty((M, 0, N))
    names = list(model.names)
    out = {name: [] for name in names}

    def value(var_idx, idx):
        if idx >= n:
            return sim[:, idx - n, var_idx]
        return np.full(M, hist[idx, var_idx])

    for step in range(1, horizon + 1):
        t = n - 1 + step
        X = np.empty((M, 1 + N * p))
        X[:, 0] = 1.0
        for l in range(1, p + 1):
            for j in range(N):
                X[:, 1 + (l - 1) * N + j] = value(j, t - l)
        mean = np.einsum("mik,mk->mi", Pi, X)
        log_h = phi_h[:, :, 0] * log_h + np.sqrt(sig_eta) * rng.standard_normal((M, N))
        lam_new = phi_l[:, :, 0] * lam + np.sqrt(sig_xi) * rng.standard_normal((M, N))
        for i, d in enumerate(model.shape_designs):
            if d is None:
                continue
            for c, (src, lag) in enumerate(d.terms):
                col = value(names.index(src), t - lag) if src != CONST else np.ones(M)
                lam_new[:, i] += phi_l[:, i, 1 + c] * col
        lam = lam_new
        eps = draw_mixing(lam, nu, rng)[3]
        e = np.exp(0.5 * log_h) * eps
        u = np.einsum("mij,mj->mi", Ainv, e)
        y = mean + u
        for i, name in enumerate(names):
            other = u[:, i] - e[:, i]  # unit diagonal of A^-1
            out[name].append(
                PredictiveDensity(origin, step, y[:, i], mean[:, i] + other, np.exp(0.5 * log_h[:, i]),
                                  lam[:, i].copy(), nu, name)
            )
        sim = np.concatenate([sim, y[:, None, :]], axis=1)
    return out
