"""Expanding-window out-of-sample backtests and forecast file I/O."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import pipeline
from .abg_qr import BaselineForecast
from .config import ModelConfig, RunConfig
from .dataio import SeriesFrame
from .errors import DataError, TVSSVError
from .forecast import PredictiveDensity
from .persist import read_csv, write_csv
from .scoring import SCORE_COLUMNS, ScoreReport, build_report, score_forecasts

FORECAST_COLUMNS = ("origin", "horizon", "draw_index", "value", "loc", "scale", "shape", "nu", "realized")
QR_PARAM_COLUMNS = ("origin", "horizon", "loc", "scale", "shape", "df", "rms", "iterations")


def origin_seed(master: int, origin_idx: int, model_idx: int) -> np.random.SeedSequence:
    """Seed for one (origin, model) job; independent of run order and parallelism."""
    return np.random.SeedSequence([int(master), int(origin_idx), int(model_idx)])


def origin_indices(frame: SeriesFrame, start: str | None, end: str | None) -> list[int]:
    if start is None:
        raise DataError("backtest needs a start origin")
    i0 = frame.index_of(start)
    i1 = frame.index_of(end) if end else frame.T - 1
    if i1 < i0:
        raise DataError(f"backtest end {end} precedes start {start}")
    return list(range(i0, i1 + 1))


def baseline_density(bf: BaselineForecast, variable: str) -> PredictiveDensity:
    """The two-step baseline as a one-component mixture in the standardized parameterization."""
    loc, scale, shape, nu = bf.density.standardized()
    pd_ = PredictiveDensity(bf.origin, bf.horizon, bf.draws, np.array([loc]), np.array([scale]),
                            np.array([shape]), nu, variable)
    pd_.meta["fit"] = bf.fit
    return pd_


def forecast_model(mc: ModelConfig, info: SeriesFrame, horizon: int, settings, seed,
                   origin=None, fanout: int = 1) -> PredictiveDensity:
    """Predictive density of the target ``horizon`` periods after the end of ``info``."""
    fit_seed, sim_seed = seed.spawn(2)
    rng_sim = np.random.default_rng(sim_seed)
    if mc.kind == "qr":
        bf = pipeline.qr_forecast(mc, info, horizon, rng_sim, origin)
        return baseline_density(bf, mc.target)
    fit = pipeline.estimate(mc, info, settings, fit_seed)
    return pipeline.forecast_fitted(fit, horizon, rng_sim, origin, fanout)[horizon - 1]


@dataclass
class _Job:
    mc: ModelConfig
    model_idx: int
    origin_idx: int
    frame: SeriesFrame
    horizon: int
    settings: object
    master: int
    fanout: int


def _run_job(job: _Job) -> PredictiveDensity:
    label = job.frame.dates[job.origin_idx]
    # the information set ends at the origin; nothing later is ever visible to the model
    info = job.frame.head(job.origin_idx + 1)
    try:
        pd_ = forecast_model(job.mc, info, job.horizon, job.settings,
                             origin_seed(job.master, job.origin_idx, job.model_idx), label, job.fanout)
    except TVSSVError as e:
        e.args = (f"origin {label}, model {job.mc.name}: {e}",)
        raise
    t = job.origin_idx + job.horizon
    pd_.realized = float(job.frame.column(job.mc.target)[t]) if t < job.frame.T else math.nan
    pd_.meta["origin_idx"] = job.origin_idx
    return pd_


@dataclass
class BacktestResult:
    horizon: int
    forecasts: dict[str, list[PredictiveDensity]] = field(default_factory=dict)

    def scores(self) -> dict[str, dict[str, np.ndarray]]:
        out = {}
        for name, fc in self.forecasts.items():
            ok = [f for f in fc if np.isfinite(f.realized)]
            out[name] = score_forecasts(ok, [f.realized for f in ok])
        return out

    def report(self, baseline: str | None = None, columns=SCORE_COLUMNS) -> ScoreReport:
        names = list(self.forecasts)
        baseline = baseline or names[0]
        if baseline not in self.forecasts:
            raise DataError(f"baseline {baseline!r} is not among the backtested models {names}")
        return build_report(self.scores(), baseline, columns, self.horizon)


def backtest(cfg: RunConfig, frame: SeriesFrame, models=None, seed: int | None = None,
             jobs: int = 1, progress=None) -> BacktestResult:
    """Re-estimate every model at each origin and simulate its horizon-H density.

    Origins run from ``cfg.backtest.start`` to ``end`` inclusive over an expanding
    window that always starts at the first observation.  Each (origin, model)
    job draws its randomness from ``SeedSequence([seed, origin, model])``, so the
    output does not depend on ``jobs``.
    """
    bt = cfg.backtest
    if bt.horizon < 1:
        raise DataError("horizon must be >= 1")
    master = cfg.mcmc.seed if seed is None else seed
    chosen = [cfg.model(m) for m in models] if models else list(cfg.models)
    origins = origin_indices(frame, bt.start, bt.end)
    work = [
        _Job(mc, cfg.models.index(mc), o, frame, bt.horizon, cfg.mcmc, master, bt.fanout)
        for mc in chosen
        for o in origins
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            done = list(ex.map(_run_job, work))
    else:
        done = []
        for k, job in enumerate(work):
            done.append(_run_job(job))
            if progress is not None:
                progress(k + 1, len(work))
    res = BacktestResult(bt.horizon)
    for job, pd_ in zip(work, done):
        res.forecasts.setdefault(job.mc.name, []).append(pd_)
    return res


# ---------------------------------------------------------------------------
# forecast files


def forecast_rows(forecasts: list[PredictiveDensity]) -> list[dict]:
    """One row per draw; component columns are filled on the first n_components rows."""
    rows = []
    for f in forecasts:
        nc = 0 if f.loc is None else f.loc.size
        for i, v in enumerate(f.draws):
            r = {"origin": f.origin, "horizon": f.horizon, "draw_index": i, "value": float(v),
                 "nu": f.nu, "realized": f.realized}
            if i < nc:
                r.update(loc=float(f.loc[i]), scale=float(f.scale[i]), shape=float(f.shape[i]))
            rows.append(r)
    return rows


def write_forecasts(path, forecasts: list[PredictiveDensity], meta: dict):
    return write_csv(path, forecast_rows(forecasts), meta, FORECAST_COLUMNS)


def read_forecasts(path) -> tuple[dict, list[PredictiveDensity]]:
    meta, rows = read_csv(path)
    missing = [c for c in ("origin", "horizon", "draw_index", "value") if rows and c not in rows[0]]
    if missing:
        raise DataError(f"{path}: forecast file lacks columns {missing}")
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["origin"], int(r["horizon"])), []).append(r)
    out = []
    for (origin, h), rs in groups.items():
        rs.sort(key=lambda r: int(r["draw_index"]))
        draws = np.array([float(r["value"]) for r in rs])
        comp = [r for r in rs if r.get("loc", "") != ""]
        nu = float(rs[0].get("nu") or "inf")
        realized = float(rs[0].get("realized") or "nan")
        if comp:
            loc = np.array([float(r["loc"]) for r in comp])
            scale = np.array([float(r["scale"]) for r in comp])
            shape = np.array([float(r["shape"]) for r in comp])
            f = PredictiveDensity(origin, h, draws, loc, scale, shape, nu, meta.get("variable", "y"), realized)
        else:
            f = PredictiveDensity(origin, h, draws, nu=nu, variable=meta.get("variable", "y"), realized=realized)
        out.append(f)
    return meta, out


def qr_param_rows(forecasts: list[PredictiveDensity]) -> list[dict]:
    rows = []
    for f in forecasts:
        fit = f.meta.get("fit")
        if fit is None:
            continue
        d = fit.density
        rows.append({"origin": f.origin, "horizon": f.horizon, "loc": d.loc, "scale": d.scale,
                     "shape": d.shape, "df": d.df, "rms": fit.rms, "iterations": fit.iterations})
    return rows


def score_rows(name: str, forecasts: list[PredictiveDensity]) -> list[dict]:
    ok = [f for f in forecasts if np.isfinite(f.realized)]
    sc = score_forecasts(ok, [f.realized for f in ok])
    rows = []
    for i, f in enumerate(ok):
        rows.append({"model": name, "origin": f.origin, "horizon": f.horizon, "realized": f.realized,
                     **{k: float(sc[k][i]) for k in (*SCORE_COLUMNS, "pit")}})
    return rows


def evaluate_forecasts(sets: dict[str, list[PredictiveDensity]], baseline: str, horizon: int = 1) -> ScoreReport:
    """Score several models' forecasts on their common origins and build the comparison."""
    common = None
    for fc in sets.values():
        keys = {f.origin for f in fc if np.isfinite(f.realized)}
        common = keys if common is None else common & keys
    if not common:
        raise DataError("forecast sets share no scored origins")
    scores = {}
    for name, fc in sets.items():
        ok = sorted((f for f in fc if f.origin in common), key=lambda f: str(f.origin))
        scores[name] = score_forecasts(ok, [f.realized for f in ok])
    return build_report(scores, baseline, SCORE_COLUMNS, horizon)
