"""Lagged design matrices built from named series.

A design is a list of terms ``(source, lag)``; ``("const", 0)`` is an intercept.
The same object builds the in-sample matrix and the out-of-sample rows used
when forecasting, where sources other than simulated ones are held at their
last observed value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

CONST = "const"


@dataclass(frozen=True)
class LaggedDesign:
    terms: tuple[tuple[str, int], ...]

    def __post_init__(self):
        terms = tuple((str(s), int(l)) for s, l in self.terms)
        for s, l in terms:
            if s != CONST and l < 1:
                raise DataError(f"term {s!r} must enter with lag >= 1, got {l}")
        object.__setattr__(self, "terms", terms)

    @property
    def width(self) -> int:
        return len(self.terms)

    @property
    def max_lag(self) -> int:
        return max((l for s, l in self.terms if s != CONST), default=0)

    @property
    def labels(self) -> list[str]:
        return [CONST if s == CONST else f"{s}.L{l}" for s, l in self.terms]

    def matrix(self, series: dict[str, np.ndarray], start: int, stop: int) -> np.ndarray:
        """Rows for target periods start..stop-1 (0-based indices into the series)."""
        if start < self.max_lag:
            raise DataError(f"design needs {self.max_lag} presample periods, got {start}")
        out = np.empty((stop - start, self.width))
        for j, (s, l) in enumerate(self.terms):
            if s == CONST:
                out[:, j] = 1.0
            else:
                out[:, j] = _get(series, s)[start - l : stop - l]
        return out

    def row(self, series: dict[str, np.ndarray], t: int) -> np.ndarray:
        """Row for target period t; indices past the end hold the last value."""
        out = np.empty(self.width)
        for j, (s, l) in enumerate(self.terms):
            if s == CONST:
                out[j] = 1.0
            else:
                x = _get(series, s)
                out[j] = x[min(t - l, x.size - 1)]
        return out

    def sources(self) -> set[str]:
        return {s for s, _ in self.terms if s != CONST}


def _get(series, name):
    try:
        return np.asarray(series[name], dtype=float)
    except KeyError:
        raise DataError(f"series {name!r} not available for design") from None


def ar_design(name: str, lags: int, intercept: bool = True, extra=()) -> LaggedDesign:
    terms = [(CONST, 0)] if intercept else []
    terms += [(name, l) for l in range(1, lags + 1)]
    terms += list(extra)
    return LaggedDesign(tuple(terms))
