"""CSV ingestion, series transforms and regular period indices."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataError

TRANSFORMS = ("level", "log", "diff", "log-diff")
FRED_CODES = {1: "level", 2: "diff", 4: "log", 5: "log-diff"}

_MONTHLY = re.compile(r"^\s*(\d{4})-(\d{1,2})\s*$")
_QUARTERLY = re.compile(r"^\s*(\d{4})-?Q([1-4])\s*$", re.IGNORECASE)


def normalize_transform(name) -> str:
    if isinstance(name, (int, np.integer)) or (isinstance(name, str) and name.strip().isdigit()):
        code = int(name)
        if code not in FRED_CODES:
            raise DataError(f"unsupported transform code {code}")
        return FRED_CODES[code]
    key = str(name).strip().lower().replace("_", "-")
    key = {"logdiff": "log-diff", "dlog": "log-diff", "lvl": "level", "none": "level"}.get(key, key)
    if key not in TRANSFORMS:
        raise DataError(f"unknown transform {name!r}")
    return key


def parse_period(label: str) -> pd.Period:
    m = _QUARTERLY.match(str(label))
    if m:
        return pd.Period(year=int(m.group(1)), quarter=int(m.group(2)), freq="Q")
    m = _MONTHLY.match(str(label))
    if m and 1 <= int(m.group(2)) <= 12:
        return pd.Period(year=int(m.group(1)), month=int(m.group(2)), freq="M")
    raise DataError(f"unparseable date {label!r} (expected YYYY-MM or YYYY-Qq)")


def period_label(p: pd.Period) -> str:
    if p.freqstr.startswith("Q"):
        return f"{p.year}-Q{p.quarter}"
    return f"{p.year}-{p.month:02d}"


@dataclass
class SeriesFrame:
    dates: list[str]
    values: np.ndarray
    names: list[str]
    transforms: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(len(self.dates), len(self.names))
        if np.isnan(self.values).any():
            raise DataError("frame contains missing values")

    @property
    def T(self) -> int:
        return len(self.dates)

    @property
    def N(self) -> int:
        return len(self.names)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise DataError(f"variable {name!r} not in data (have {self.names})") from None

    def series(self) -> dict[str, np.ndarray]:
        return {n: self.values[:, j].copy() for j, n in enumerate(self.names)}

    def index_of(self, label: str) -> int:
        target = parse_period(label)
        for i, d in enumerate(self.dates):
            if parse_period(d) == target:
                return i
        raise DataError(f"date {label!r} not in sample {self.dates[0]}..{self.dates[-1]}")

    def head(self, stop: int) -> SeriesFrame:
        """Periods 0..stop-1 (the information set of an origin at stop-1)."""
        return SeriesFrame(self.dates[:stop], self.values[:stop].copy(), list(self.names), list(self.transforms))

    def select(self, names) -> SeriesFrame:
        idx = [self.names.index(n) for n in names]
        return SeriesFrame(list(self.dates), self.values[:, idx], list(names), [self.transforms[i] for i in idx])


def apply_transform(x, transform: str) -> np.ndarray:
    """Transform a level series; differenced outputs start with NaN."""
    x = np.asarray(x, dtype=float)
    t = normalize_transform(transform)
    if t in ("log", "log-diff"):
        finite = x[np.isfinite(x)]
        if np.any(finite <= 0):
            raise DataError("non-positive value under log")
        x = np.log(x)
    if t in ("diff", "log-diff"):
        out = np.full_like(x, np.nan)
        out[1:] = np.diff(x)
        return out
    return x


def invert_transform(z, transform: str, initial: float | None = None) -> np.ndarray:
    """Undo :func:`apply_transform`; differenced series need the level before the first value."""
    z = np.asarray(z, dtype=float)
    t = normalize_transform(transform)
    if t in ("diff", "log-diff"):
        if initial is None:
            raise DataError("initial level required to invert a differenced series")
        base = np.log(initial) if t == "log-diff" else initial
        z = base + np.cumsum(z)
    if t in ("log", "log-diff"):
        return np.exp(z)
    return z


def load_csv(path, schema: dict | None = None) -> SeriesFrame:
    """Read a CSV with a leading ``date`` column and apply per-series transforms.

    ``schema`` maps column name to transform (names or FRED-style codes);
    ``None`` keeps every column in levels.  Leading rows with missing values are
    dropped; interior gaps raise :class:`DataError`.
    """
    try:
        df = pd.read_csv(path, comment="#", dtype=str)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"cannot read {path}: {e}") from None
    return frame_from_table(df, schema)


def frame_from_table(df: pd.DataFrame, schema: dict | None = None) -> SeriesFrame:
    cols = [c.strip() for c in df.columns]
    df.columns = cols
    if not cols or cols[0].lower() != "date":
        raise DataError("first column must be 'date'")
    if schema is None:
        schema = {c: "level" for c in cols[1:]}
    names = list(schema)
    missing = [n for n in names if n not in cols]
    if missing:
        raise DataError(f"columns not found in data: {missing}")
    periods = [parse_period(d) for d in df[cols[0]]]
    freqs = {p.freqstr for p in periods}
    if len(freqs) > 1:
        raise DataError("mixed monthly and quarterly dates")
    for a, b in zip(periods, periods[1:]):
        if (b.ordinal - a.ordinal) != 1:
            raise DataError(f"dates not regular/strictly increasing at {period_label(a)} -> {period_label(b)}")
    raw = np.empty((len(df), len(names)))
    for j, n in enumerate(names):
        try:
            raw[:, j] = pd.to_numeric(df[n].str.strip().replace({"": None}), errors="raise")
        except (ValueError, TypeError):
            raise DataError(f"non-numeric entries in column {n!r}") from None
    transforms = [normalize_transform(schema[n]) for n in names]
    vals = np.column_stack([apply_transform(raw[:, j], t) for j, t in enumerate(transforms)]) if names else raw
    labels = [period_label(p) for p in periods]
    bad = np.isnan(vals).any(axis=1)
    start = int(np.argmin(bad)) if not bad.all() else len(bad)
    if start == len(bad):
        raise DataError("no complete rows in data")
    if bad[start:].any():
        first = start + int(np.argmax(bad[start:]))
        raise DataError(f"interior missing value at {labels[first]}")
    return SeriesFrame(labels[start:], vals[start:], names, transforms)


def write_frame_csv(path, frame: SeriesFrame, header: dict | None = None) -> None:
    with open(path, "w", newline="") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={v}\n")
        fh.write(",".join(["date"] + frame.names) + "\n")
        for d, row in zip(frame.dates, frame.values):
            fh.write(",".join([d] + [repr(float(x)) for x in row]) + "\n")


def period_range(start: str, n: int) -> list[str]:
    p = parse_period(start)
    return [period_label(p + i) for i in range(n)]


def backtest(cfg, frame: SeriesFrame, **kwargs):
    """Expanding-window out-of-sample loop; see :func:`tvssv.backtest.backtest`."""
    from .backtest import backtest as _run

    return _run(cfg, frame, **kwargs)
