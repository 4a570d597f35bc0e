"""Turn a model configuration and a data frame into fitted models and forecasts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import priors
from .abg_qr import BaselineForecast, baseline_forecast
from .config import McmcSettings, ModelConfig
from .dataio import SeriesFrame
from .design import CONST, LaggedDesign, ar_design
from .draws import PosteriorDraws
from .errors import ConfigError, DataError
from .forecast import PredictiveDensity, simulate_predictive, simulate_var_predictive
from .skewdist import family_from_name
from .uni_sampler import McmcConfig, StatePrior, UniModelSpec, UniPriorSpec, run_chain
from .var_sampler import VarModelSpec, VarPriorSpec, run_var_chain


def mcmc_config(ms: McmcSettings, seed) -> McmcConfig:
    return McmcConfig(iters=ms.iters, burn_in=ms.burn_in, thin=ms.thin, num_particles=ms.particles,
                      path_method=ms.path_method, seed=seed, stationary=ms.stationary)


def _check_sources(design: LaggedDesign | None, frame: SeriesFrame):
    if design is None:
        return
    for s in design.sources():
        if s not in frame.names:
            raise ConfigError(f"regressor {s!r} is not a data column (have {frame.names})")


def _minnesota(mc: ModelConfig) -> priors.MinnesotaHyper:
    return priors.MinnesotaHyper(*mc.theta)


# ---------------------------------------------------------------------------
# univariate


def build_uni_model(mc: ModelConfig, frame: SeriesFrame) -> UniModelSpec:
    target = mc.target
    frame.column(target)
    x_design = ar_design(target, mc.lags, mc.intercept, mc.exog)
    shape_design = LaggedDesign(tuple(mc.shape_exog.get(target, []))) if mc.shape_exog.get(target) else None
    vol_design = LaggedDesign(tuple(mc.vol_exog)) if mc.vol_exog else None
    for d in (x_design, shape_design, vol_design):
        _check_sources(d, frame)
    t0 = max(d.max_lag for d in (x_design, shape_design, vol_design) if d is not None)
    series = frame.series()
    n = frame.T
    if n - t0 < x_design.width + 10:
        raise DataError(f"model {mc.name}: only {n - t0} usable observations")
    return UniModelSpec(
        y=series[target][t0:],
        X=x_design.matrix(series, t0, n),
        family=family_from_name(mc.family, mc.nu),
        vol_exo=None if vol_design is None else vol_design.matrix(series, t0, n),
        shape_exo=None if shape_design is None else shape_design.matrix(series, t0, n),
        x_design=x_design,
        vol_design=vol_design,
        shape_design=shape_design,
        series=series,
        target=target,
    )


def _state_prior(mc: ModelConfig, h0_mean: float, k_vol: int, k_shape: int) -> StatePrior:
    m, v = mc.phi_prior
    return StatePrior(
        phi_h_mean=np.r_[m, np.zeros(k_vol)],
        phi_h_var=np.r_[v, np.full(k_vol, mc.beta_var)],
        phi_lam_mean=np.r_[m, np.zeros(k_shape)],
        phi_lam_var=np.r_[v, np.full(k_shape, mc.beta_var)],
        sig_eta=mc.sig_eta,
        sig_xi=mc.sig_xi,
        h0_mean=h0_mean,
        h0_var=mc.h0_var,
        lam0_mean=0.0,
        lam0_var=mc.lam0_var,
    )


def uni_prior(mc: ModelConfig, model: UniModelSpec) -> UniPriorSpec:
    series = model.series
    var = priors.univariate_pi_variances(model.x_design, model.target, series, _minnesota(mc), mc.scale_lags)
    mean = np.zeros(model.p)
    center = mc.own_lag_center.get(model.target, 0.0)
    for j, (src, lag) in enumerate(model.x_design.terms):
        if src == model.target and lag == 1:
            mean[j] = center
    sp = _state_prior(mc, priors.initial_logvol_mean(series[model.target]), model.k_vol, model.k_shape)
    return UniPriorSpec(pi_mean=mean, pi_cov=np.diag(var), **sp.__dict__)


# ---------------------------------------------------------------------------
# VAR


def build_var_model(mc: ModelConfig, frame: SeriesFrame) -> VarModelSpec:
    names = list(mc.variables)
    for v in names:
        frame.column(v)
    designs = []
    for v in names:
        terms = mc.shape_exog.get(v, [])
        for src, _ in terms:
            if src not in names:
                raise ConfigError(f"VAR skewness regressor {src!r} must be one of the VAR variables")
        designs.append(LaggedDesign(tuple(terms)) if terms else None)
    p = mc.lags
    t0 = max([p] + [d.max_lag for d in designs if d is not None])
    series = frame.series()
    Y = np.column_stack([series[v] for v in names])
    n = Y.shape[0]
    if n - t0 <= len(names) * p + 1:
        raise DataError(f"model {mc.name}: only {n - t0} usable observations")
    shape_exo = [None if d is None else d.matrix(series, t0, n) for d in designs]
    return VarModelSpec(Y[t0:], Y[t0 - p : t0], p, family_from_name(mc.family, mc.nu), names, shape_exo, designs)


def var_prior(mc: ModelConfig, model: VarModelSpec) -> VarPriorSpec:
    full = np.vstack([model.presample, model.Y])
    lags = min(mc.scale_lags, max(1, (full.shape[0] - 3) // 3))
    s2 = priors.estimate_scales(full, lags)
    hyper = _minnesota(mc)
    var = priors.minnesota_variances(hyper, s2, model.N, model.lags)
    centers = [mc.own_lag_center.get(v, 0.0) for v in model.names]
    mean = priors.minnesota_means(model.N, model.lags, centers)
    state = [
        _state_prior(mc, priors.initial_logvol_mean(full[:, i]), 0, model.k_shape(i)) for i in range(model.N)
    ]
    return VarPriorSpec(mean, var, state, a_var=mc.a_var)


# ---------------------------------------------------------------------------
# estimation and forecasting


@dataclass
class Fitted:
    config: ModelConfig
    model: UniModelSpec | VarModelSpec | None
    draws: PosteriorDraws | None


def estimate(mc: ModelConfig, frame: SeriesFrame, ms: McmcSettings, seed, progress=None) -> Fitted:
    """Fit one Bayesian model; ``seed`` is anything ``np.random.default_rng`` accepts."""
    rng = np.random.default_rng(seed)
    cfg = mcmc_config(ms, _seed_repr(seed))
    if mc.kind == "uni":
        model = build_uni_model(mc, frame)
        draws = run_chain(model, uni_prior(mc, model), cfg, rng=rng, progress=progress)
    elif mc.kind == "var":
        model = build_var_model(mc, frame)
        draws = run_var_chain(model, var_prior(mc, model), cfg, rng=rng, progress=progress)
        draws.meta["ordering"] = list(model.names)
    else:
        raise ConfigError(f"model {mc.name} of type {mc.kind!r} is not estimated by MCMC")
    draws.meta["name"] = mc.name
    return Fitted(mc, model, draws)


def _seed_repr(seed):
    if isinstance(seed, np.random.SeedSequence):
        return [int(x) for x in np.atleast_1d(seed.entropy)] + list(seed.spawn_key)
    return seed


def forecast_fitted(fit: Fitted, horizon: int, rng: np.random.Generator, origin=None,
                    fanout: int = 1) -> list[PredictiveDensity]:
    """Densities of the target variable at horizons 1..H."""
    mc = fit.config
    if mc.kind == "uni":
        return simulate_predictive(fit.draws, fit.model, horizon, rng, origin, fanout)
    out = simulate_var_predictive(fit.draws, fit.model, horizon, rng, origin, fanout)
    return out[mc.target]


def qr_design(mc: ModelConfig, horizon: int) -> LaggedDesign:
    """Direct-projection design: regressors dated at least ``horizon`` periods before the target."""
    base = ar_design(mc.target, mc.lags, mc.intercept, mc.exog)
    return LaggedDesign(tuple((s, l if s == CONST else l + horizon - 1) for s, l in base.terms))


def qr_forecast(mc: ModelConfig, frame: SeriesFrame, horizon: int, rng: np.random.Generator,
                origin=None) -> BaselineForecast:
    design = qr_design(mc, horizon)
    _check_sources(design, frame)
    series = frame.series()
    n = frame.T
    t0 = design.max_lag
    if n - t0 <= design.width + 5:
        raise DataError(f"model {mc.name}: too few observations for quantile regression")
    X = design.matrix(series, t0, n)
    y = series[mc.target][t0:]
    x_next = design.row(series, n - 1 + horizon)
    return baseline_forecast(X, y, x_next, rng, n_draws=mc.n_pred_draws, origin=origin, horizon=horizon)
