"""Gibbs sampler for the univariate model with time-varying volatility and skewness.

Observation equation::

    y_t = x_t pi + sqrt(h_t) eps_t,   eps_t standardized Skew-Normal / Skew-t(lambda_t)

with AR(1) state equations for log h_t and lambda_t (optional exogenous terms).
The conditionals are written in terms of the residual r_t = y_t - x_t pi so the
VAR sampler can reuse them on orthogonalized residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from . import pgas
from .design import LaggedDesign
from .draws import PosteriorDraws
from .errors import ConfigError, DomainError, NumericalError, ParticleCollapseError
from .skewdist import ShockFamily, SkewNormal, SkewT, one_minus_delta2, skew_params, truncnorm_positive
from .states import LatentPaths


# ---------------------------------------------------------------------------
# model settings


@dataclass
class UniModelSpec:
    """Data and structure of a univariate model.

    ``vol_exo`` / ``shape_exo`` are (T, k) matrices whose row t enters the
    state equation of period t.  The optional designs and raw ``series`` let
    the forecaster rebuild future regressor rows.
    """

    y: np.ndarray
    X: np.ndarray
    family: ShockFamily = field(default_factory=SkewNormal)
    vol_exo: np.ndarray | None = None
    shape_exo: np.ndarray | None = None
    x_design: LaggedDesign | None = None
    vol_design: LaggedDesign | None = None
    shape_design: LaggedDesign | None = None
    series: dict | None = None
    target: str = "y"

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if self.X.shape[0] != self.y.size:
            raise DomainError("regressor rows must match observations")
        for name in ("vol_exo", "shape_exo"):
            m = getattr(self, name)
            if m is not None:
                m = np.asarray(m, dtype=float)
                if m.ndim == 1:
                    m = m[:, None]
                if m.shape[0] != self.y.size:
                    raise DomainError(f"{name} rows must match observations")
                setattr(self, name, m)

    @property
    def T(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def nu(self) -> float:
        return self.family.nu

    @property
    def k_vol(self) -> int:
        return 0 if self.vol_exo is None else self.vol_exo.shape[1]

    @property
    def k_shape(self) -> int:
        return 0 if self.shape_exo is None else self.shape_exo.shape[1]


@dataclass
class StatePrior:
    """Priors of the state-equation block of one series (shape-scale inverse gamma)."""

    phi_h_mean: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    phi_h_var: np.ndarray = field(default_factory=lambda: np.array([0.01]))
    phi_lam_mean: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    phi_lam_var: np.ndarray = field(default_factory=lambda: np.array([0.01]))
    sig_eta: tuple[float, float] = (5.0, 0.16)
    sig_xi: tuple[float, float] = (5.0, 0.16)
    h0_mean: float = 0.0
    h0_var: float = 100.0
    lam0_mean: float = 0.0
    lam0_var: float = 10.0

    def __post_init__(self):
        _check_state_prior(self)


def _check_state_prior(pr):
    for name in ("phi_h_mean", "phi_h_var", "phi_lam_mean", "phi_lam_var"):
        setattr(pr, name, np.atleast_1d(np.asarray(getattr(pr, name), dtype=float)))
    for name in ("phi_h_var", "phi_lam_var"):
        if np.any(getattr(pr, name) <= 0):
            raise ConfigError(f"{name} must be positive")
    if getattr(pr, "phi_h_mean").size != pr.phi_h_var.size or pr.phi_lam_mean.size != pr.phi_lam_var.size:
        raise ConfigError("state-equation prior mean and variance sizes differ")
    for name in ("sig_eta", "sig_xi"):
        a, b = getattr(pr, name)
        if not (a > 0 and b > 0):
            raise ConfigError(f"{name} inverse-gamma hyperparameters must be positive")
    if not (pr.h0_var > 0 and pr.lam0_var > 0):
        raise ConfigError("initial-state prior variances must be positive")


@dataclass
class UniPriorSpec:
    """Prior hyperparameters.

    State-equation coefficient priors are independent Normals on
    ``[phi, beta_1, ..., beta_k]``; inverse-gamma priors use the shape-scale
    convention (density proportional to x^-(a+1) exp(-b/x)).
    """

    pi_mean: np.ndarray
    pi_cov: np.ndarray
    phi_h_mean: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    phi_h_var: np.ndarray = field(default_factory=lambda: np.array([0.01]))
    phi_lam_mean: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    phi_lam_var: np.ndarray = field(default_factory=lambda: np.array([0.01]))
    sig_eta: tuple[float, float] = (5.0, 0.16)
    sig_xi: tuple[float, float] = (5.0, 0.16)
    h0_mean: float = 0.0
    h0_var: float = 100.0
    lam0_mean: float = 0.0
    lam0_var: float = 10.0

    def __post_init__(self):
        self.pi_mean = np.atleast_1d(np.asarray(self.pi_mean, dtype=float))
        self.pi_cov = np.atleast_2d(np.asarray(self.pi_cov, dtype=float))
        if self.pi_cov.shape != (self.pi_mean.size, self.pi_mean.size):
            raise ConfigError("pi_cov shape does not match pi_mean")
        try:
            np.linalg.cholesky(self.pi_cov)
        except np.linalg.LinAlgError:
            raise ConfigError("pi_cov must be positive definite") from None
        _check_state_prior(self)
        self.pi_prec = np.linalg.inv(self.pi_cov)


@dataclass
class McmcConfig:
    iters: int = 10000
    burn_in: int = 5000
    thin: int = 1
    num_particles: int = pgas.DEFAULT_PARTICLES
    path_method: str = "pgas"
    seed: int = 0
    stationary: bool = False
    keep_paths: bool = True

    def __post_init__(self):
        if self.iters <= self.burn_in:
            raise ConfigError(f"iters ({self.iters}) must exceed burn_in ({self.burn_in})")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if self.path_method not in ("pgas", "mh"):
            raise ConfigError(f"unknown path_method {self.path_method!r}")

    @property
    def n_keep(self) -> int:
        return (self.iters - self.burn_in) // self.thin


@dataclass
class UniState:
    pi: np.ndarray
    phi_h: np.ndarray
    phi_lam: np.ndarray
    sig_eta: float
    sig_xi: float
    log_h: np.ndarray
    log_h0: float
    lam: np.ndarray
    lam0: float
    v: np.ndarray
    o: np.ndarray

    def copy(self) -> UniState:
        return UniState(
            self.pi.copy(), self.phi_h.copy(), self.phi_lam.copy(), self.sig_eta, self.sig_xi,
            self.log_h.copy(), self.log_h0, self.lam.copy(), self.lam0, self.v.copy(), self.o.copy(),
        )

    def paths(self) -> LatentPaths:
        return LatentPaths(np.exp(self.log_h), self.log_h0, self.lam, self.lam0, self.v, self.o)


# ---------------------------------------------------------------------------
# full conditionals


def draw_mixing_v(r, h, lam, o, nu: float, rng: np.random.Generator) -> np.ndarray:
    """Draw v_t ~ TN_[0,inf)(m_t, 1 - delta_t^2) given the residual r_t."""
    m = v_mean(r, h, lam, o, nu)
    return truncnorm_positive(m, np.sqrt(one_minus_delta2(lam)), rng)


def v_mean(r, h, lam, o, nu: float):
    zeta, omega, delta = skew_params(lam, nu)
    return delta * np.sqrt(o) * (np.asarray(r) / np.sqrt(h) - zeta) / omega


def o_proposal_params(r, h, lam, nu: float):
    """Shape and rate of the Gamma proposal for o_t."""
    zeta, omega, delta = skew_params(lam, nu)
    zhat2 = ((np.asarray(r) / np.sqrt(h) - zeta) / omega) ** 2 / one_minus_delta2(lam)
    return (nu + 1.0) / 2.0, 0.5 * (nu + zhat2)


def o_log_accept(r, h, lam, v, o_cur, o_prop, nu: float):
    """Log acceptance probability (before min with 0) of the independence MH move."""
    zeta, omega, delta = skew_params(lam, nu)
    c = (np.asarray(r) / np.sqrt(h) - zeta) * delta * v / (omega * one_minus_delta2(lam))
    return c * (np.sqrt(o_prop) - np.sqrt(o_cur))


def draw_mixing_o(r, h, lam, v, o, nu: float, rng: np.random.Generator):
    """Independence MH update of the Skew-t mixing variables; returns (o, accepted)."""
    shape, rate = o_proposal_params(r, h, lam, nu)
    prop = rng.gamma(shape, 1.0 / rate)
    u = rng.random(np.shape(prop))
    accept = np.log(u) < o_log_accept(r, h, lam, v, o, prop, nu)
    return np.where(accept, prop, o), accept


def skew_adjusted_target(y, h, lam, v, o, nu: float):
    """Return (y_tilde, sigma2_t): y minus the shock's conditional mean, and its variance."""
    zeta, omega, delta = skew_params(lam, nu)
    sh = np.sqrt(h)
    yt = np.asarray(y) - sh * zeta - sh * omega * delta * v / np.sqrt(o)
    s2 = h * omega**2 * one_minus_delta2(lam) / o
    return yt, s2


def gaussian_regression_draw(Z, target, weights, prior_mean, prior_prec, rng):
    """Draw beta ~ N(P^-1 b, P^-1) with P = prior_prec + Z'WZ, b = prior_prec mu + Z'W target."""
    P = prior_prec + (Z * weights[:, None]).T @ Z
    b = prior_prec @ prior_mean + Z.T @ (weights * target)
    try:
        L = np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NumericalError("posterior precision is not positive definite") from None
    mean = linalg.cho_solve((L, True), b)
    z = rng.standard_normal(mean.size)
    return mean + linalg.solve_triangular(L.T, z, lower=False)


def draw_pi(y, X, h, lam, v, o, nu: float, prior: UniPriorSpec, rng: np.random.Generator):
    yt, s2 = skew_adjusted_target(y, h, lam, v, o, nu)
    if not np.all(np.isfinite(s2) & (s2 > 0)):
        raise NumericalError("non-positive observation variance in regression draw")
    return gaussian_regression_draw(X, yt, 1.0 / s2, prior.pi_mean, prior.pi_prec, rng)


def _state_regressors(path, s0, exo):
    lagged = np.concatenate(([s0], path[:-1]))
    if exo is None or exo.shape[1] == 0:
        return lagged[:, None]
    return np.column_stack([lagged, exo])


def draw_phi(path, s0: float, exo, sigma2: float, mean, var, rng: np.random.Generator) -> np.ndarray:
    """Normal draw of [phi, beta] from the regression of s_t on [s_{t-1}, exo_t], t = 1..T."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    var = np.atleast_1d(np.asarray(var, dtype=float))
    path = np.asarray(path, dtype=float)
    if path.size == 0:
        return mean + np.sqrt(var) * rng.standard_normal(mean.size)
    Z = _state_regressors(path, s0, exo)
    w = np.full(path.size, 1.0 / sigma2)
    return gaussian_regression_draw(Z, path, w, mean, np.diag(1.0 / var), rng)


def state_residuals(path, s0: float, coeffs, exo) -> np.ndarray:
    Z = _state_regressors(np.asarray(path, dtype=float), s0, exo)
    return path - Z @ np.atleast_1d(coeffs)


def ig_posterior(resid, shape: float, scale: float) -> tuple[float, float]:
    resid = np.asarray(resid, dtype=float)
    return shape + resid.size / 2.0, scale + 0.5 * float(resid @ resid)


def draw_sigma2(path, s0: float, coeffs, exo, shape: float, scale: float, rng: np.random.Generator) -> float:
    """Inverse-gamma draw of a state innovation variance (shape-scale convention)."""
    a, b = ig_posterior(state_residuals(path, s0, coeffs, exo), shape, scale)
    return b / rng.gamma(a)


def initial_state_moments(first_state, offset1, phi, sigma2, mean0, var0):
    prec = 1.0 / var0 + phi * phi / sigma2
    mean = (mean0 / var0 + phi * (first_state - offset1) / sigma2) / prec
    return mean, 1.0 / prec


def draw_initial_state(first_state, offset1, phi, sigma2, mean0, var0, rng: np.random.Generator) -> float:
    """Draw s_0 given s_1; falls back to the prior when phi = 0."""
    if phi == 0.0:
        return float(mean0 + math.sqrt(var0) * rng.standard_normal())
    m, v = initial_state_moments(first_state, offset1, phi, sigma2, mean0, var0)
    return float(m + math.sqrt(v) * rng.standard_normal())


# ---------------------------------------------------------------------------
# one sweep


def _offsets(exo, coeffs):
    if exo is None or exo.shape[1] == 0:
        return None
    return exo @ coeffs[1:]


def _draw_coeffs(current, path, s0, exo, sigma2, mean, var, stationary, rng):
    for _ in range(100 if stationary else 1):
        c = draw_phi(path, s0, exo, sigma2, mean, var, rng)
        if not stationary or abs(c[0]) < 1.0:
            return c
    return current


def update_latent(
    st: UniState,
    r,
    nu: float,
    vol_exo,
    shape_exo,
    prior: StatePrior | UniPriorSpec,
    cfg: McmcConfig,
    rng: np.random.Generator,
) -> None:
    """State-equation parameters, initial states and paths given the residuals r.

    Order: sigma2_eta, sigma2_xi, phi_h, phi_lambda, h0, h path, lambda0, lambda path.
    """
    st.sig_eta = draw_sigma2(st.log_h, st.log_h0, st.phi_h, vol_exo, *prior.sig_eta, rng)
    st.sig_xi = draw_sigma2(st.lam, st.lam0, st.phi_lam, shape_exo, *prior.sig_xi, rng)
    st.phi_h = _draw_coeffs(st.phi_h, st.log_h, st.log_h0, vol_exo, st.sig_eta,
                            prior.phi_h_mean, prior.phi_h_var, cfg.stationary, rng)
    st.phi_lam = _draw_coeffs(st.phi_lam, st.lam, st.lam0, shape_exo, st.sig_xi,
                              prior.phi_lam_mean, prior.phi_lam_var, cfg.stationary, rng)

    off_h = _offsets(vol_exo, st.phi_h)
    st.log_h0 = draw_initial_state(st.log_h[0], 0.0 if off_h is None else off_h[0], st.phi_h[0],
                                   st.sig_eta, prior.h0_mean, prior.h0_var, rng)
    zeta, omega, delta = skew_params(st.lam, nu)
    obs_h = pgas.logvol_observation(r, zeta, omega, delta, st.v, st.o, one_minus_delta2(st.lam))
    st.log_h = _path_step(st.log_h, st.log_h0, st.phi_h[0], st.sig_eta, off_h, obs_h, cfg, rng)

    off_l = _offsets(shape_exo, st.phi_lam)
    st.lam0 = draw_initial_state(st.lam[0], 0.0 if off_l is None else off_l[0], st.phi_lam[0],
                                 st.sig_xi, prior.lam0_mean, prior.lam0_var, rng)
    obs_l = pgas.shape_observation(np.asarray(r) * np.exp(-0.5 * st.log_h), st.v, st.o, nu)
    st.lam = _path_step(st.lam, st.lam0, st.phi_lam[0], st.sig_xi, off_l, obs_l, cfg, rng)


def _path_step(path, s0, phi, sigma2, offsets, obs, cfg, rng):
    if cfg.path_method == "mh":
        return pgas.mh_path_update(path, s0, phi, sigma2, offsets, obs, rng)[0]
    return pgas.pgas_ar1(path, s0, phi, sigma2, offsets, obs, rng, cfg.num_particles)


def gibbs_step(st: UniState, model: UniModelSpec, prior: UniPriorSpec, cfg: McmcConfig,
               rng: np.random.Generator) -> UniState:
    """One full sweep: [o], v, pi, then the state-equation blocks. Updates ``st`` in place."""
    nu = model.nu
    h = np.exp(st.log_h)
    r = model.y - model.X @ st.pi
    if isinstance(model.family, SkewT):
        st.o, _ = draw_mixing_o(r, h, st.lam, st.v, st.o, nu, rng)
    st.v = draw_mixing_v(r, h, st.lam, st.o, nu, rng)
    st.pi = draw_pi(model.y, model.X, h, st.lam, st.v, st.o, nu, prior, rng)
    r = model.y - model.X @ st.pi
    update_latent(st, r, nu, model.vol_exo, model.shape_exo, prior, cfg, rng)
    return st


# ---------------------------------------------------------------------------
# prior simulation and data generation


def draw_state_from_prior(model: UniModelSpec, prior: UniPriorSpec, rng: np.random.Generator) -> UniState:
    """Parameters and latent paths drawn from the prior (given the exogenous data)."""
    pi = rng.multivariate_normal(prior.pi_mean, prior.pi_cov)
    return draw_latent_from_prior(pi, model.T, model.nu, model.vol_exo, model.shape_exo, prior, rng)


def draw_latent_from_prior(pi, T, nu, vol_exo, shape_exo, prior, rng) -> UniState:
    phi_h = prior.phi_h_mean + np.sqrt(prior.phi_h_var) * rng.standard_normal(prior.phi_h_mean.size)
    phi_lam = prior.phi_lam_mean + np.sqrt(prior.phi_lam_var) * rng.standard_normal(prior.phi_lam_mean.size)
    sig_eta = prior.sig_eta[1] / rng.gamma(prior.sig_eta[0])
    sig_xi = prior.sig_xi[1] / rng.gamma(prior.sig_xi[0])
    log_h0 = prior.h0_mean + math.sqrt(prior.h0_var) * rng.standard_normal()
    lam0 = prior.lam0_mean + math.sqrt(prior.lam0_var) * rng.standard_normal()
    log_h = _simulate_state(log_h0, phi_h, sig_eta, vol_exo, T, rng)
    lam = _simulate_state(lam0, phi_lam, sig_xi, shape_exo, T, rng)
    v, o = draw_vo_prior(lam, nu, rng)
    return UniState(pi, phi_h, phi_lam, sig_eta, sig_xi, log_h, log_h0, lam, lam0, v, o)


def _simulate_state(s0, coeffs, sigma2, exo, T, rng):
    off = _offsets(exo, coeffs)
    eps = math.sqrt(sigma2) * rng.standard_normal(T)
    out = np.empty(T)
    prev = s0
    for t in range(T):
        prev = coeffs[0] * prev + (0.0 if off is None else off[t]) + eps[t]
        out[t] = prev
    return out


def draw_vo_prior(lam, nu: float, rng: np.random.Generator):
    lam = np.asarray(lam, dtype=float)
    v = truncnorm_positive(np.zeros(lam.shape), 1.0, rng)
    o = np.ones(lam.shape) if math.isinf(nu) else rng.gamma(nu / 2.0, 2.0 / nu, size=lam.shape)
    return v, o


def simulate_y(st: UniState, X, nu: float, rng: np.random.Generator) -> np.ndarray:
    """y given parameters, paths and mixing variables."""
    zeta, omega, delta = skew_params(st.lam, nu)
    z = rng.standard_normal(st.lam.size)
    eps = zeta + omega / np.sqrt(st.o) * (delta * st.v + np.sqrt(one_minus_delta2(st.lam)) * z)
    return X @ st.pi + np.exp(0.5 * st.log_h) * eps


def simulate_model(
    T: int,
    X,
    pi,
    phi_h: float,
    sig_eta: float,
    phi_lam: float,
    sig_xi: float,
    family: ShockFamily,
    rng: np.random.Generator,
    log_h0: float = 0.0,
    lam0: float = 0.0,
    beta_lam=None,
    shape_exo=None,
):
    """Simulate a univariate data set with fixed regressors; returns (y, UniState)."""
    X = np.asarray(X, dtype=float).reshape(T, -1)
    coeffs_l = np.concatenate(([phi_lam], np.atleast_1d([] if beta_lam is None else beta_lam)))
    exo = None if shape_exo is None else np.asarray(shape_exo, dtype=float).reshape(T, -1)
    log_h = _simulate_state(log_h0, np.array([phi_h]), sig_eta, None, T, rng)
    lam = _simulate_state(lam0, coeffs_l, sig_xi, exo, T, rng)
    v, o = draw_vo_prior(lam, family.nu, rng)
    st = UniState(np.atleast_1d(np.asarray(pi, dtype=float)), np.array([phi_h]), coeffs_l,
                  sig_eta, sig_xi, log_h, log_h0, lam, lam0, v, o)
    return simulate_y(st, X, family.nu, rng), st


# ---------------------------------------------------------------------------
# chain driver


def initial_state(model: UniModelSpec, prior: UniPriorSpec, rng: np.random.Generator) -> UniState:
    """Data-based starting point: OLS coefficients, constant volatility, zero skewness."""
    T = model.T
    beta, *_ = np.linalg.lstsq(model.X, model.y, rcond=None)
    resid = model.y - model.X @ beta
    lv = math.log(max(float(resid.var()), 1e-8))
    lam = np.zeros(T)
    v, o = draw_vo_prior(lam, model.nu, rng)
    return UniState(
        beta, np.concatenate(([0.95], np.zeros(model.k_vol))),
        np.concatenate(([0.95], np.zeros(model.k_shape))),
        prior.sig_eta[1] / (prior.sig_eta[0] + 1.0), prior.sig_xi[1] / (prior.sig_xi[0] + 1.0),
        np.full(T, lv), lv, lam, 0.0, v, o,
    )


def run_chain(
    model: UniModelSpec,
    prior: UniPriorSpec,
    mcmc: McmcConfig,
    init: UniState | None = None,
    rng: np.random.Generator | None = None,
    progress=None,
) -> PosteriorDraws:
    """Run the Gibbs sampler and return the retained draws.

    Parameters
    ----------
    model, prior
        Data/structure and hyperparameters.
    mcmc
        Chain settings; ``iters`` counts burn-in.
    init
        Optional starting state; defaults to :func:`initial_state`.
    rng
        Optional generator; defaults to ``np.random.default_rng(mcmc.seed)``.

    Raises
    ------
    ParticleCollapseError, NumericalError
        Re-raised with the iteration index in the message.
    """
    if model.T < model.p + 10:
        raise DomainError(f"need at least p + 10 = {model.p + 10} observations, got {model.T}")
    if prior.pi_mean.size != model.p:
        raise ConfigError(f"prior has {prior.pi_mean.size} regression coefficients, model has {model.p}")
    if prior.phi_h_mean.size != 1 + model.k_vol or prior.phi_lam_mean.size != 1 + model.k_shape:
        raise ConfigError("state-equation prior size does not match exogenous terms")
    rng = np.random.default_rng(mcmc.seed) if rng is None else rng
    st = initial_state(model, prior, rng) if init is None else init.copy()
    store = _Store(mcmc.n_keep, model.T, model.p, 1 + model.k_vol, 1 + model.k_shape, mcmc.keep_paths)
    for it in range(mcmc.iters):
        try:
            gibbs_step(st, model, prior, mcmc, rng)
        except ParticleCollapseError as e:
            raise ParticleCollapseError(e.t, f"particle collapse at iteration {it}") from e
        except NumericalError as e:
            raise NumericalError(f"iteration {it}: {e}") from e
        k = it - mcmc.burn_in
        if k >= 0 and k % mcmc.thin == 0 and k // mcmc.thin < mcmc.n_keep:
            store.put(k // mcmc.thin, st)
        if progress is not None:
            progress(it + 1, mcmc.iters)
    meta = {
        "model": "univariate",
        "family": model.family.name,
        "nu": model.nu,
        "seed": mcmc.seed,
        "iters": mcmc.iters,
        "burn_in": mcmc.burn_in,
        "thin": mcmc.thin,
        "num_particles": mcmc.num_particles,
        "path_method": mcmc.path_method,
        "target": model.target,
    }
    return PosteriorDraws(store.arrays, meta)


class _Store:
    def __init__(self, n, T, p, kh, kl, keep_paths):
        self.keep_paths = keep_paths
        self.arrays = {
            "pi": np.empty((n, p)),
            "phi_h": np.empty((n, kh)),
            "phi_lam": np.empty((n, kl)),
            "sig_eta": np.empty(n),
            "sig_xi": np.empty(n),
            "log_h0": np.empty(n),
            "lam0": np.empty(n),
            "log_h": np.empty((n, T)),
            "lam": np.empty((n, T)),
        }
        if keep_paths:
            self.arrays["v"] = np.empty((n, T))
            self.arrays["o"] = np.empty((n, T))

    def put(self, i, st: UniState):
        a = self.arrays
        a["pi"][i] = st.pi
        a["phi_h"][i] = st.phi_h
        a["phi_lam"][i] = st.phi_lam
        a["sig_eta"][i] = st.sig_eta
        a["sig_xi"][i] = st.sig_xi
        a["log_h0"][i] = st.log_h0
        a["lam0"][i] = st.lam0
        a["log_h"][i] = st.log_h
        a["lam"][i] = st.lam
        if self.keep_paths:
            a["v"][i] = st.v
            a["o"][i] = st.o


def with_family(model: UniModelSpec, family: ShockFamily) -> UniModelSpec:
    return replace(model, family=family)
