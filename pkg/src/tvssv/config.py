"""Run configuration read from INI files.

Sections: ``[data]``, ``[mcmc]``, one ``[model NAME]`` per model, optional
``[backtest]`` and ``[output]``.  See the README for the full key list.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

from .errors import ConfigError

MODEL_KINDS = ("uni", "var", "qr")


@dataclass
class ModelConfig:
    name: str
    kind: str
    target: str | None = None
    variables: list[str] = field(default_factory=list)
    family: str = "skew_t"
    nu: float = 5.0
    lags: int = 2
    intercept: bool = True
    exog: list[tuple[str, int]] = field(default_factory=list)
    shape_exog: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    vol_exog: list[tuple[str, int]] = field(default_factory=list)
    own_lag_center: dict[str, float] = field(default_factory=dict)
    theta: tuple[float, float, float, float] = (0.04, 0.025, 100.0, 2.0)
    phi_prior: tuple[float, float] = (1.0, 0.01)
    beta_var: float = 10.0
    sig_eta: tuple[float, float] = (5.0, 0.16)
    sig_xi: tuple[float, float] = (5.0, 0.16)
    h0_var: float = 100.0
    lam0_var: float = 10.0
    a_var: float = 100.0
    scale_lags: int = 12
    n_pred_draws: int = 5000

    @property
    def endogenous(self) -> list[str]:
        return list(self.variables) if self.kind == "var" else [self.target]


@dataclass
class McmcSettings:
    iters: int = 10000
    burn_in: int = 5000
    thin: int = 1
    particles: int = 30
    path_method: str = "pgas"
    seed: int = 0
    stationary: bool = False


@dataclass
class BacktestSettings:
    start: str | None = None
    end: str | None = None
    horizon: int = 1
    baseline: str | None = None
    fanout: int = 1


@dataclass
class RunConfig:
    data_path: str
    transforms: dict[str, str]
    models: list[ModelConfig]
    mcmc: McmcSettings
    backtest: BacktestSettings
    output_dir: str = "out"
    plots: bool = False
    text: str = ""

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:12]

    def model(self, name: str | None = None) -> ModelConfig:
        if name is None:
            return self.models[0]
        for m in self.models:
            if m.name == name:
                return m
        raise ConfigError(f"no model named {name!r} (have {[m.name for m in self.models]})")


def _require(sec, key, where):
    if key not in sec or not str(sec[key]).strip():
        raise ConfigError(f"missing config key '{key}' in [{where}]")
    return sec[key].strip()


def _terms(text: str) -> list[tuple[str, int]]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, lag = item.partition(":")
        try:
            out.append((name.strip(), int(lag) if lag else 1))
        except ValueError:
            raise ConfigError(f"bad lag in term {item!r} (expected name:lag)") from None
    return out


def _pair(text: str, key: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"'{key}' must be two comma-separated numbers") from None
    return a, b


def _mapping(text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        k, sep, v = item.partition("=")
        if not sep:
            raise ConfigError(f"bad entry {item!r} (expected name=value)")
        out[k.strip()] = v.strip()
    return out


def _get(sec, key, conv, default, where):
    if key not in sec:
        return default
    try:
        return conv(sec[key])
    except ValueError:
        raise ConfigError(f"invalid value for '{key}' in [{where}]: {sec[key]!r}") from None


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def parse_model(name: str, sec) -> ModelConfig:
    where = f"model {name}"
    kind = _require(sec, "type", where).lower()
    if kind not in MODEL_KINDS:
        raise ConfigError(f"model type must be one of {MODEL_KINDS}, got {kind!r}")
    m = ModelConfig(name=name, kind=kind)
    if kind == "var":
        m.variables = [v.strip() for v in _require(sec, "variables", where).split(",") if v.strip()]
        if len(m.variables) < 2:
            raise ConfigError("a VAR needs at least two variables")
        m.target = sec.get("target", m.variables[0]).strip()
        m.lags = _get(sec, "lags", int, 1, where)
    else:
        m.target = _require(sec, "target", where)
        m.lags = _get(sec, "lags", int, 2, where)
    m.family = sec.get("family", m.family).strip()
    m.nu = _get(sec, "nu", float, m.nu, where)
    m.intercept = _get(sec, "intercept", _bool, True, where)
    m.exog = _terms(sec.get("exog", ""))
    m.vol_exog = _terms(sec.get("vol_exog", ""))
    if "shape_exog" in sec:
        m.shape_exog[m.target] = _terms(sec["shape_exog"])
    for key in sec:
        if key.startswith("shape_exog."):
            m.shape_exog[key.split(".", 1)[1]] = _terms(sec[key])
    if "own_lag_center" in sec:
        txt = sec["own_lag_center"]
        if "=" in txt:
            m.own_lag_center = {k: float(v) for k, v in _mapping(txt).items()}
        else:
            m.own_lag_center = {v: float(txt) for v in m.endogenous}
    m.theta = tuple(_get(sec, f"theta{i}", float, m.theta[i - 1], where) for i in range(1, 5))
    if "phi_prior" in sec:
        m.phi_prior = _pair(sec["phi_prior"], "phi_prior")
    if "sig_eta" in sec:
        m.sig_eta = _pair(sec["sig_eta"], "sig_eta")
    if "sig_xi" in sec:
        m.sig_xi = _pair(sec["sig_xi"], "sig_xi")
    m.beta_var = _get(sec, "beta_var", float, m.beta_var, where)
    m.h0_var = _get(sec, "h0_var", float, m.h0_var, where)
    m.lam0_var = _get(sec, "lam0_var", float, m.lam0_var, where)
    m.a_var = _get(sec, "a_var", float, m.a_var, where)
    m.scale_lags = _get(sec, "scale_lags", int, m.scale_lags, where)
    m.n_pred_draws = _get(sec, "pred_draws", int, m.n_pred_draws, where)
    if m.lags < (1 if kind == "var" else 0):
        raise ConfigError("lags out of range")
    return m


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse config: {e}") from None
    if "data" not in cp:
        raise ConfigError("missing config section [data]")
    data = cp["data"]
    path = _require(data, "path", "data")
    transforms = _mapping(data.get("transforms", ""))
    models = [parse_model(s.split(None, 1)[1].strip(), cp[s]) for s in cp.sections() if s.startswith("model ")]
    if "model" in cp:
        models.insert(0, parse_model(cp["model"].get("name", "model"), cp["model"]))
    if not models:
        raise ConfigError("missing config section [model NAME]")
    if len({m.name for m in models}) != len(models):
        raise ConfigError("duplicate model names")
    ms = McmcSettings()
    if "mcmc" in cp:
        sec = cp["mcmc"]
        ms = McmcSettings(
            iters=_get(sec, "iters", int, ms.iters, "mcmc"),
            burn_in=_get(sec, "burn_in", int, ms.burn_in, "mcmc"),
            thin=_get(sec, "thin", int, ms.thin, "mcmc"),
            particles=_get(sec, "particles", int, ms.particles, "mcmc"),
            path_method=sec.get("path_method", ms.path_method).strip(),
            seed=_get(sec, "seed", int, ms.seed, "mcmc"),
            stationary=_get(sec, "stationary", _bool, ms.stationary, "mcmc"),
        )
    bt = BacktestSettings()
    if "backtest" in cp:
        sec = cp["backtest"]
        bt = BacktestSettings(
            start=sec.get("start"),
            end=sec.get("end"),
            horizon=_get(sec, "horizon", int, 1, "backtest"),
            baseline=sec.get("baseline"),
            fanout=_get(sec, "fanout", int, 1, "backtest"),
        )
    out = cp["output"] if "output" in cp else {}
    return RunConfig(
        data_path=path,
        transforms=transforms,
        models=models,
        mcmc=ms,
        backtest=bt,
        output_dir=out.get("dir", "out"),
        plots=_get(out, "plots", _bool, False, "output") if out else False,
        text=_canonical(cp),
    )


def _canonical(cp) -> str:
    lines = []
    for s in sorted(cp.sections()):
        lines.append(f"[{s}]")
        for k in sorted(cp[s]):
            lines.append(f"{k}={cp[s][k].strip()}")
    return "\n".join(lines)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse_config(text)
