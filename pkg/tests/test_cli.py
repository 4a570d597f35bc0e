from __future__ import annotations

import shutil

import pytest

from tvssv import __version__
from tvssv.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from tvssv.persist import load_draws, read_csv
from tvssv.scoring import SCORE_COLUMNS

CFG = """
[data]
path = data.csv

[mcmc]
iters = 40
burn_in = 20
seed = 11

[model qr]
type = qr
target = gdp
lags = 1
exog = nfci:1
pred_draws = 400

[model sv]
type = uni
target = gdp
lags = 1
shape_exog = nfci:1
family = skew_t
nu = 5

[model var]
type = var
variables = gdp, nfci
lags = 1

[backtest]
start = 1985-Q2
end = 1987-Q3
horizon = 1
baseline = qr
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--T", "68", "--seed", "2", "--out", str(d / "data.csv")]) == EXIT_OK
    (d / "run.cfg").write_text(CFG)
    return d


def _meta_ok(path, seed="11"):
    meta, _ = read_csv(path)
    assert meta["code_version"] == __version__
    assert meta["seed"] == seed
    assert len(meta["config_hash"]) == 12
    return meta


def test_simulate_header(workdir):
    text = (workdir / "data.csv").read_text()
    assert "# seed=2" in text and text.count("\n") > 68


def test_missing_key_exit_code(workdir, capsys):
    (workdir / "bad.cfg").write_text(CFG.replace("target = gdp\nlags = 1\nexog", "lags = 1\nexog"))
    assert main(["estimate", "--config", str(workdir / "bad.cfg")]) == EXIT_CONFIG
    assert "target" in capsys.readouterr().err


def test_missing_data_exit_code(workdir):
    rc = main(["estimate", "--config", str(workdir / "run.cfg"), "--data", str(workdir / "none.csv")])
    assert rc == EXIT_DATA


def test_estimate_outputs(workdir):
    out = workdir / "est"
    assert main(["estimate", "--config", str(workdir / "run.cfg"), "--model", "sv", "--out", str(out)]) == EXIT_OK
    for f in ("sv_draws.npz", "sv_summary.csv", "sv_paths.csv"):
        assert (out / f).exists()
    assert not list(out.glob("*.svg"))
    _meta_ok(out / "sv_summary.csv")
    d = load_draws(out / "sv_draws.npz")
    assert d.n_draws == 20 and d.meta["seed"] == 11


def test_var_lag_override(workdir):
    out = workdir / "var13"
    rc = main(["estimate", "--config", str(workdir / "run.cfg"), "--model", "var", "--lags", "13",
               "--iters", "12", "--burn-in", "10", "--out", str(out)])
    assert rc == EXIT_OK
    d = load_draws(out / "var_draws.npz")
    assert d["Pi"].shape == (2, 2, 1 + 2 * 13)
    assert d.meta["lags"] == 13


def test_forecast_and_reuse_draws(workdir):
    out = workdir / "fc"
    cfg = str(workdir / "run.cfg")
    assert main(["estimate", "--config", cfg, "--model", "uni", "--out", str(out)]) == EXIT_OK
    assert main(["forecast", "--config", cfg, "--model", "sv", "--horizon", "2", "--out", str(out),
                 "--draws", str(out / "sv_draws.npz")]) == EXIT_OK
    _meta_ok(out / "sv_forecast.csv")
    _, tail = read_csv(out / "sv_tail_risk.csv")
    assert [r["horizon"] for r in tail] == ["1", "2"]
    assert {"gar_q05", "es_q05", "recession_prob"} <= set(tail[0])


@pytest.mark.filterwarnings("ignore:Skew-t interpolation RMS")
def test_backtest_then_evaluate(workdir):
    out = workdir / "bt"
    cfg = str(workdir / "run.cfg")
    assert main(["backtest", "--config", cfg, "--model", "qr", "--out", str(out)]) == EXIT_OK
    _, rep = read_csv(out / "backtest_report.csv")
    assert set(SCORE_COLUMNS) <= set(rep[0])
    assert (out / "qr_skewt_params.csv").exists()
    assert not list(out.glob("*.svg"))
    # the same forecasts under two names: ratios are one and DM p-values one half
    shutil.copy(out / "qr_forecast.csv", out / "copy.csv")
    text = (out / "copy.csv").read_text().replace("# model=qr", "# model=twin")
    (out / "copy.csv").write_text(text)
    ev = workdir / "ev"
    assert main(["evaluate", str(out / "qr_forecast.csv"), str(out / "copy.csv"), "--out", str(ev)]) == EXIT_OK
    meta, rows = read_csv(ev / "evaluate_report.csv")
    twin = next(r for r in rows if r["model"] == "twin")
    assert float(twin["logscore"]) == pytest.approx(0.0)
    for c in SCORE_COLUMNS[1:]:
        assert float(twin[c]) == pytest.approx(1.0)
    for c in SCORE_COLUMNS:
        assert float(twin[f"{c}_p"]) == pytest.approx(0.5)
    assert meta["seed"] == "11"


def test_plot_flag_writes_svg(workdir):
    pytest.importorskip("matplotlib")
    out = workdir / "plot"
    rc = main(["estimate", "--config", str(workdir / "run.cfg"), "--model", "sv", "--out", str(out), "--plot"])
    assert rc == EXIT_OK
    assert (out / "sv_paths.svg").exists()


def test_unknown_model(workdir, capsys):
    assert main(["estimate", "--config", str(workdir / "run.cfg"), "--model", "zz"]) == EXIT_CONFIG


def test_evaluate_missing_file_exit_code(workdir, capsys):
    assert main(["evaluate", str(workdir / "absent.csv"), "--out", str(workdir / "ev_missing")]) == EXIT_DATA
    assert "absent.csv" in capsys.readouterr().err
