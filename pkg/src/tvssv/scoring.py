"""Density-forecast evaluation.

All scores are negatively oriented (smaller is better).  Quantile-based scores
use type-7 empirical quantiles of the predictive draws on the fixed grid
alpha = 0.01, 0.02, ..., 0.99 with trapezoid weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

ALPHA_GRID = np.round(np.arange(1, 100) / 100.0, 2)
DEFAULT_TAUS = (0.05, 0.10, 0.20)
MIN_DM_LENGTH = 10


def _draws(pd) -> np.ndarray:
    return np.asarray(getattr(pd, "draws", pd), dtype=float)


def log_score(pd, y: float) -> float:
    """-log f(y) using the forecast's analytic density."""
    return -float(pd.logpdf(y))


def crps(pd, y: float) -> float:
    """Energy form E|X - y| - E|X - X'| / 2 over the predictive draws."""
    x = np.sort(_draws(pd))
    M = x.size
    first = np.mean(np.abs(x - y))
    # E|X - X'| = (2 / M^2) sum_i (2i - M - 1) x_(i)
    w = 2.0 * np.arange(1, M + 1) - M - 1.0
    second = float(w @ x) / (M * M)
    return float(first - second)


def quantile_score(q, y, alpha):
    """QS_alpha = 2 (1{y <= q} - alpha) (q - y)."""
    q = np.asarray(q, dtype=float)
    ind = (np.asarray(y, dtype=float) <= q).astype(float)
    out = 2.0 * (ind - alpha) * (q - y)
    return float(out) if out.ndim == 0 else out


def _trapezoid_weights(grid):
    g = np.asarray(grid, dtype=float)
    w = np.zeros_like(g)
    d = np.diff(g)
    w[:-1] += d / 2.0
    w[1:] += d / 2.0
    return w


_TRAP = _trapezoid_weights(ALPHA_GRID)


def weighted_quantile_crps(pd, y: float, weight=None) -> float:
    """Trapezoid approximation of the integral of QS_alpha(F^-1(alpha), y) v(alpha)."""
    q = np.quantile(_draws(pd), ALPHA_GRID)
    qs = quantile_score(q, y, ALPHA_GRID)
    v = np.ones_like(ALPHA_GRID) if weight is None else weight(ALPHA_GRID)
    return float(np.sum(_TRAP * v * qs))


def crps_quantile(pd, y: float) -> float:
    return weighted_quantile_crps(pd, y)


def left_tail_weight(alpha):
    return (1.0 - alpha) ** 2


def twcrps(pd, y: float) -> float:
    """Tail-weighted CRPS with v(alpha) = (1 - alpha)^2."""
    return weighted_quantile_crps(pd, y, left_tail_weight)


def pit(pd, y: float) -> float:
    return float(np.mean(_draws(pd) <= y))


@dataclass(frozen=True)
class DMResult:
    stat: float
    p_value: float
    degenerate: bool = False


def dm_test(loss_a, loss_b, one_sided: bool = True, horizon: int = 1) -> DMResult:
    """Diebold-Mariano test on d_t = loss_a - loss_b.

    The long-run variance is the plain variance for horizon 1 and a Newey-West
    (Bartlett) estimate with horizon - 1 lags otherwise.  The one-sided p-value
    is for the alternative that forecast a has the smaller expected loss.
    """
    a = np.asarray(loss_a, dtype=float)
    b = np.asarray(loss_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("loss series must be 1-d and of equal length")
    if a.size < MIN_DM_LENGTH:
        raise ValueError(f"need at least {MIN_DM_LENGTH} loss pairs, got {a.size}")
    d = a - b
    T = d.size
    dbar = float(d.mean())
    dc = d - dbar
    lrv = float(dc @ dc) / T
    for j in range(1, max(horizon, 1)):
        w = 1.0 - j / horizon
        lrv += 2.0 * w * float(dc[j:] @ dc[:-j]) / T
    scale = math.sqrt(lrv / T) if lrv > 0 else 0.0
    # variance relative to the level of the differences decides degeneracy
    if scale <= 1e-14 * max(1.0, abs(dbar)):
        if abs(dbar) <= 1e-14:
            return DMResult(0.0, 0.5 if one_sided else 1.0, True)
        stat = math.copysign(math.inf, dbar)
        if one_sided:
            return DMResult(stat, 0.0 if dbar < 0 else 1.0, True)
        return DMResult(stat, 0.0, True)
    stat = dbar / scale
    if one_sided:
        p = float(special.ndtr(stat))
    else:
        p = float(2.0 * special.ndtr(-abs(stat)))
    return DMResult(float(stat), p)


# ---------------------------------------------------------------------------
# reports


SCORE_COLUMNS = ("logscore", "crps", "twcrps", "qs05", "qs10", "qs20")


def _tau_label(tau: float) -> str:
    return f"qs{int(round(tau * 100)):02d}"


def score_forecasts(forecasts, realized, taus=DEFAULT_TAUS) -> dict[str, np.ndarray]:
    """Per-origin scores for a sequence of forecasts and their outcomes."""
    realized = np.asarray(realized, dtype=float)
    if len(forecasts) != realized.size:
        raise ValueError("one realized value per forecast required")
    out = {k: np.empty(realized.size) for k in ("logscore", "crps", "twcrps", "pit")}
    for tau in taus:
        out[_tau_label(tau)] = np.empty(realized.size)
    for i, (f, y) in enumerate(zip(forecasts, realized)):
        out["logscore"][i] = log_score(f, y) if hasattr(f, "logpdf") else math.nan
        out["crps"][i] = crps(f, y)
        out["twcrps"][i] = twcrps(f, y)
        out["pit"][i] = pit(f, y)
        x = _draws(f)
        for tau in taus:
            out[_tau_label(tau)][i] = quantile_score(np.quantile(x, tau), y, tau)
    return out


@dataclass
class ScoreReport:
    """Baseline levels and, per competing model, differences/ratios with DM p-values.

    Log score entries for competitors are ``baseline mean - model mean`` (values
    above zero favor the model); the other scores are ``model mean / baseline
    mean`` (values below one favor the model).  p-values are one-sided DM tests
    of the alternative that the model beats the baseline.
    """

    baseline: str
    columns: tuple[str, ...]
    levels: dict[str, float]
    rows: dict[str, dict[str, tuple[float, float]]] = field(default_factory=dict)
    n_origins: int = 0

    def to_records(self) -> list[dict]:
        recs = [{"model": self.baseline, "kind": "level",
                 **{c: self.levels[c] for c in self.columns}}]
        for name, row in self.rows.items():
            rec = {"model": name, "kind": "relative"}
            for c in self.columns:
                rec[c] = row[c][0]
                rec[f"{c}_p"] = row[c][1]
            recs.append(rec)
        return recs

    def to_text(self) -> str:
        width = 14
        head = f"{'':<18}" + "".join(f"{c:>{width}}" for c in self.columns)
        lines = [head, f"{self.baseline:<18}" + "".join(f"{self.levels[c]:>{width}.4f}" for c in self.columns)]
        for name, row in self.rows.items():
            vals = "".join(f"{row[c][0]:>{width}.4f}" for c in self.columns)
            ps = "".join(f"{'(' + format(row[c][1], '.3f') + ')':>{width}}" for c in self.columns)
            lines.append(f"{name:<18}" + vals)
            lines.append(f"{'':<18}" + ps)
        return "\n".join(lines)


def build_report(scores: dict[str, dict[str, np.ndarray]], baseline: str,
                 columns=SCORE_COLUMNS, horizon: int = 1) -> ScoreReport:
    base = scores[baseline]
    levels = {c: float(np.mean(base[c])) for c in columns}
    rep = ScoreReport(baseline, tuple(columns), levels, n_origins=len(base[columns[0]]))
    for name, sc in scores.items():
        if name == baseline:
            continue
        row = {}
        for c in columns:
            m = float(np.mean(sc[c]))
            # too few origins for a DM test: report the comparison without a p-value
            p = math.nan
            if len(sc[c]) >= MIN_DM_LENGTH:
                p = dm_test(sc[c], base[c], one_sided=True, horizon=horizon).p_value
            value = levels[c] - m if c == "logscore" else m / levels[c]
            row[c] = (value, p)
        rep.rows[name] = row
    return rep
