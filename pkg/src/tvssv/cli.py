"""Command-line driver: ``tvssv {estimate,forecast,backtest,evaluate,simulate}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, pipeline
from .backtest import (
    backtest,
    baseline_density,
    evaluate_forecasts,
    qr_param_rows,
    read_forecasts,
    score_rows,
    write_forecasts,
)
from .config import RunConfig, load_config
from .dataio import SeriesFrame, load_csv, write_frame_csv
from .errors import ConfigError, DataError, DomainError, NumericalError
from .forecast import expected_shortfall, gar_quantile, recession_prob
from .persist import load_draws, save_draws, write_csv
from .scoring import pit
from .synthetic import simulate_gar_data

log = logging.getLogger("tvssv")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4
PATH_BANDS = (0.15, 0.5, 0.85)
PIT_BINS = 10


# ---------------------------------------------------------------------------
# configuration plumbing


def _resolve_config(args) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config)
    base = Path(args.config).resolve().parent
    if getattr(args, "data", None):
        cfg.data_path = args.data
        base = Path.cwd()
    ms = cfg.mcmc
    for attr, key in (("iters", "iters"), ("burn_in", "burn_in"), ("seed", "seed")):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(ms, key, val)
    if getattr(args, "lags", None) is not None:
        for m in cfg.models:
            m.lags = args.lags
    if getattr(args, "out", None):
        cfg.output_dir = args.out
        out = Path(args.out)
    else:
        out = Path(cfg.output_dir)
        if not out.is_absolute():
            out = Path(args.config).resolve().parent / out
    if getattr(args, "plot", False):
        cfg.plots = True
    data = Path(cfg.data_path)
    if not data.is_absolute():
        data = base / data
    cfg.data_path = str(data)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _load_frame(cfg: RunConfig) -> SeriesFrame:
    return load_csv(cfg.data_path, cfg.transforms or None)


def _pick_model(cfg: RunConfig, name: str | None):
    """``--model`` accepts a model name or a model type (uni/var/qr)."""
    if name is None:
        return cfg.models[0]
    for m in cfg.models:
        if m.name == name:
            return m
    kinds = [m for m in cfg.models if m.kind == name]
    if kinds:
        return kinds[0]
    raise ConfigError(f"no model named or of type {name!r} (have {[m.name for m in cfg.models]})")


def _meta(cfg: RunConfig, **extra) -> dict:
    return {"config_hash": cfg.config_hash, "seed": cfg.mcmc.seed, **extra}


def _progress(label):
    def cb(i, n):
        if i == n or i % max(1, n // 10) == 0:
            log.info("%s: %d/%d", label, i, n)

    return cb


# ---------------------------------------------------------------------------
# outputs


def path_quantile_rows(draws, dates: list[str], names: list[str] | None) -> list[dict]:
    """Median and 15th/85th percentile bands of the latent log-volatility and shape paths."""
    rows = []
    lh, lam = draws["log_h"], draws["lam"]
    if lh.ndim == 2:
        lh, lam = lh[:, None, :], lam[:, None, :]
        names = names or ["y"]
    qh = np.quantile(lh, PATH_BANDS, axis=0)
    ql = np.quantile(lam, PATH_BANDS, axis=0)
    T = lh.shape[-1]
    for t in range(T):
        r = {"date": dates[t]}
        for i, nm in enumerate(names):
            for k, p in enumerate(PATH_BANDS):
                r[f"{nm}_log_h_q{int(p * 100):02d}"] = float(qh[k, i, t])
            for k, p in enumerate(PATH_BANDS):
                r[f"{nm}_lam_q{int(p * 100):02d}"] = float(ql[k, i, t])
        rows.append(r)
    return rows


def _plot_paths(path: Path, rows: list[dict], names: list[str]):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = np.arange(len(rows))
    fig, axes = plt.subplots(len(names), 2, figsize=(10, 3 * len(names)), squeeze=False)
    for i, nm in enumerate(names):
        for j, what in enumerate(("log_h", "lam")):
            ax = axes[i, j]
            mid = [r[f"{nm}_{what}_q50"] for r in rows]
            ax.plot(x, mid, color="black")
            for q in ("q15", "q85"):
                ax.plot(x, [r[f"{nm}_{what}_{q}"] for r in rows], color="tab:blue", ls="--")
            ax.set_title(f"{nm}: {what}")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_pit(path: Path, pits: dict[str, np.ndarray]):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, len(pits), figsize=(4 * len(pits), 3), squeeze=False)
    for ax, (name, v) in zip(axes[0], pits.items()):
        ax.hist(v, bins=PIT_BINS, range=(0, 1), color="tab:gray", edgecolor="black")
        ax.set_title(name)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def pit_histogram_rows(pits: dict[str, np.ndarray]) -> list[dict]:
    edges = np.linspace(0.0, 1.0, PIT_BINS + 1)
    rows = []
    for name, v in pits.items():
        counts, _ = np.histogram(v, bins=edges)
        for k in range(PIT_BINS):
            rows.append({"model": name, "bin_lo": edges[k], "bin_hi": edges[k + 1], "count": int(counts[k])})
    return rows


def _tail_rows(forecasts) -> list[dict]:
    rows = []
    for f in forecasts:
        r = {"origin": f.origin, "horizon": f.horizon, "variable": f.variable}
        for tau in (0.05, 0.10, 0.20):
            r[f"gar_q{int(tau * 100):02d}"] = gar_quantile(f, tau)
            r[f"es_q{int(tau * 100):02d}"] = expected_shortfall(f, tau)
        r["recession_prob"] = recession_prob(f)
        rows.append(r)
    return rows


def _write_report(out: Path, stem: str, report, pits: dict[str, np.ndarray], meta: dict, plots: bool) -> list[Path]:
    files = [write_csv(out / f"{stem}_report.csv", report.to_records(), meta)]
    txt = out / f"{stem}_report.txt"
    txt.write_text("".join(f"# {k}={v}\n" for k, v in {"code_version": __version__, **meta}.items())
                   + report.to_text() + "\n")
    files.append(txt)
    files.append(write_csv(out / f"{stem}_pit_hist.csv", pit_histogram_rows(pits), meta))
    if plots:
        svg = out / f"{stem}_pit.svg"
        _plot_pit(svg, pits)
        files.append(svg)
    return files


# ---------------------------------------------------------------------------
# commands


def cmd_estimate(args) -> int:
    cfg, out = _resolve_config(args)
    mc = _pick_model(cfg, args.model)
    frame = _load_frame(cfg)
    fit = pipeline.estimate(mc, frame, cfg.mcmc, cfg.mcmc.seed, progress=_progress(f"estimate {mc.name}"))
    meta = _meta(cfg, model=mc.name)
    stem = args.name or mc.name
    save_draws(out / f"{stem}_draws.npz", fit.draws, **meta)
    write_csv(out / f"{stem}_summary.csv", fit.draws.summary(), meta)
    names = list(mc.variables) if mc.kind == "var" else [mc.target]
    T = fit.draws["log_h"].shape[-1]
    rows = path_quantile_rows(fit.draws, frame.dates[-T:], names)
    write_csv(out / f"{stem}_paths.csv", rows, meta)
    if cfg.plots:
        _plot_paths(out / f"{stem}_paths.svg", rows, names)
    print(f"wrote {stem}_draws.npz, {stem}_summary.csv, {stem}_paths.csv to {out}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    cfg, out = _resolve_config(args)
    mc = _pick_model(cfg, args.model)
    frame = _load_frame(cfg)
    H = args.horizon or cfg.backtest.horizon
    seed = np.random.SeedSequence([cfg.mcmc.seed, frame.T - 1, cfg.models.index(mc)])
    fit_seed, sim_seed = seed.spawn(2)
    rng = np.random.default_rng(sim_seed)
    origin = frame.dates[-1]
    if mc.kind == "qr":
        fcs = [baseline_density(pipeline.qr_forecast(mc, frame, h, rng, origin), mc.target) for h in range(1, H + 1)]
    else:
        if args.draws:
            draws = load_draws(args.draws)
            model = pipeline.build_uni_model(mc, frame) if mc.kind == "uni" else pipeline.build_var_model(mc, frame)
            fit = pipeline.Fitted(mc, model, draws)
        else:
            fit = pipeline.estimate(mc, frame, cfg.mcmc, fit_seed, progress=_progress(f"estimate {mc.name}"))
        fcs = pipeline.forecast_fitted(fit, H, rng, origin, cfg.backtest.fanout)
    meta = _meta(cfg, model=mc.name, variable=mc.target)
    stem = args.name or mc.name
    write_forecasts(out / f"{stem}_forecast.csv", fcs, meta)
    write_csv(out / f"{stem}_tail_risk.csv", _tail_rows(fcs), meta)
    print(f"wrote {stem}_forecast.csv, {stem}_tail_risk.csv to {out}")
    return EXIT_OK


def cmd_backtest(args) -> int:
    cfg, out = _resolve_config(args)
    if args.start:
        cfg.backtest.start = args.start
    if args.end:
        cfg.backtest.end = args.end
    if args.horizon:
        cfg.backtest.horizon = args.horizon
    frame = _load_frame(cfg)
    models = [_pick_model(cfg, args.model).name] if args.model else None
    res = backtest(cfg, frame, models, jobs=args.jobs, progress=_progress("backtest"))
    meta = _meta(cfg, horizon=cfg.backtest.horizon)
    for name, fc in res.forecasts.items():
        write_forecasts(out / f"{name}_forecast.csv", fc, {**meta, "model": name, "variable": cfg.model(name).target})
        write_csv(out / f"{name}_scores.csv", score_rows(name, fc), {**meta, "model": name})
        qr = qr_param_rows(fc)
        if qr:
            write_csv(out / f"{name}_skewt_params.csv", qr, {**meta, "model": name})
    baseline = cfg.backtest.baseline or next((m.name for m in cfg.models if m.kind == "qr"), None)
    baseline = baseline if baseline in res.forecasts else next(iter(res.forecasts))
    report = res.report(baseline)
    scores = res.scores()
    _write_report(out, "backtest", report, {k: v["pit"] for k, v in scores.items()}, meta, cfg.plots)
    print(report.to_text())
    return EXIT_OK


def cmd_evaluate(args) -> int:
    sets = {}
    metas = {}
    horizon = 1
    for path in args.forecasts:
        meta, fc = read_forecasts(path)
        name = meta.get("model") or Path(path).stem
        if name in sets:
            name = f"{name}_{len(sets)}"
        sets[name] = fc
        metas[name] = meta
        horizon = max(horizon, max((f.horizon for f in fc), default=1))
    baseline = args.baseline or next(iter(sets))
    if baseline not in sets:
        raise ConfigError(f"baseline {baseline!r} not among {list(sets)}")
    report = evaluate_forecasts(sets, baseline, horizon)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    m0 = metas[baseline]
    meta = {"config_hash": m0.get("config_hash", ""), "seed": m0.get("seed", ""), "baseline": baseline}
    pits = {}
    for name, fc in sets.items():
        pits[name] = np.array([pit(f, f.realized) for f in fc if math.isfinite(f.realized)])
    _write_report(out, args.name or "evaluate", report, pits, meta, args.plot)
    print(report.to_text())
    return EXIT_OK


def cmd_simulate(args) -> int:
    rng = np.random.default_rng(args.seed)
    frame, latent = simulate_gar_data(args.T, rng, family=args.family, nu=args.nu, beta_lam=args.beta_lam)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_frame_csv(out, frame, {"code_version": __version__, "seed": args.seed, "generator": "gar",
                                 "family": args.family, "beta_lam": args.beta_lam})
    if args.latent:
        rows = [{"date": d, "log_h": float(h), "lam": float(l)}
                for d, h, l in zip(frame.dates, latent["log_h"], latent["lam"])]
        write_csv(args.latent, rows, {"seed": args.seed})
    print(f"wrote {frame.T} periods to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tvssv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tvssv {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--data", help="override the data CSV path")
        sp.add_argument("--out", help="override the output directory")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--iters", type=int, help="override total MCMC iterations")
        sp.add_argument("--burn-in", dest="burn_in", type=int, help="override MCMC burn-in")
        sp.add_argument("--lags", type=int, help="override the lag order of every model")
        sp.add_argument("--plot", action="store_true", help="also write SVG figures (needs matplotlib)")
        if model:
            sp.add_argument("--model", help="model name or type (uni, var, qr); default: first model")
        sp.add_argument("--name", help="file name stem for outputs")

    sp = sub.add_parser("estimate", help="run the MCMC sampler and write draws and summaries")
    common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("forecast", help="predictive density and tail-risk measures at the sample end")
    common(sp)
    sp.add_argument("--horizon", type=int, help="forecast horizon (default: [backtest] horizon)")
    sp.add_argument("--draws", help="reuse a draws .npz from estimate instead of re-estimating")
    sp.set_defaults(func=cmd_forecast)

    sp = sub.add_parser("backtest", help="expanding-window out-of-sample evaluation")
    common(sp)
    sp.add_argument("--start", help="first forecast origin (YYYY-MM or YYYY-Qq)")
    sp.add_argument("--end", help="last forecast origin")
    sp.add_argument("--horizon", type=int, help="forecast horizon")
    sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sp.set_defaults(func=cmd_backtest)

    sp = sub.add_parser("evaluate", help="score forecast files against a baseline")
    sp.add_argument("forecasts", nargs="+", help="forecast CSVs written by forecast/backtest")
    sp.add_argument("--baseline", help="model name of the baseline (default: first file)")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--name", help="file name stem for outputs")
    sp.add_argument("--plot", action="store_true", help="also write the PIT histogram SVG")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("simulate", help="write a synthetic gdp/nfci data set")
    sp.add_argument("--T", type=int, default=200, help="number of periods")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--family", default="skew_t", choices=["skew_t", "skew_normal"])
    sp.add_argument("--nu", type=float, default=5.0)
    sp.add_argument("--beta-lam", dest="beta_lam", type=float, default=-0.5,
                    help="effect of lagged nfci on the shape parameter")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.add_argument("--latent", help="optional CSV for the true latent paths")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
