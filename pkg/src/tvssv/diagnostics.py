"""MCMC diagnostics: batch-means standard errors and joint-distribution tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special


def batch_means_se(x, n_batches: int | None = None) -> float:
    """Monte Carlo standard error of the mean of a (possibly autocorrelated) series."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n_batches is None:
        n_batches = max(2, int(math.sqrt(n)))
    size = n // n_batches
    if size < 1:
        raise ValueError("series too short for batch means")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def iid_se(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.std(ddof=1) / math.sqrt(x.size))


def effective_sample_size(x) -> float:
    x = np.asarray(x, dtype=float)
    se = batch_means_se(x)
    return float(x.var(ddof=1) / se**2) if se > 0 else float(x.size)


@dataclass(frozen=True)
class GewekeResult:
    name: str
    mean_marginal: float
    mean_successive: float
    z: float

    def passed(self, level: float = 0.01) -> bool:
        return abs(self.z) < -special.ndtri(level / 2.0)


def geweke_test(
    prior_draw: Callable,
    simulate: Callable,
    step: Callable,
    monitors: dict[str, Callable],
    n_marginal: int,
    n_successive: int,
    rng: np.random.Generator,
    squares: bool = True,
) -> list[GewekeResult]:
    """Compare marginal-conditional and successive-conditional simulators.

    ``prior_draw(rng)`` returns a state, ``simulate(state, rng)`` data given the
    state, and ``step(state, data, rng)`` one posterior-kernel transition.
    Monitored moments are the functions in ``monitors`` (and their squares).
    """
    names = list(monitors)
    mc = np.empty((n_marginal, len(names)))
    for i in range(n_marginal):
        st = prior_draw(rng)
        mc[i] = [monitors[k](st) for k in names]

    sc = np.empty((n_successive, len(names)))
    st = prior_draw(rng)
    data = simulate(st, rng)
    for i in range(n_successive):
        st = step(st, data, rng)
        data = simulate(st, rng)
        sc[i] = [monitors[k](st) for k in names]

    results = []
    cols = [(k, j, 1) for j, k in enumerate(names)]
    if squares:
        cols += [(f"{k}^2", j, 2) for j, k in enumerate(names)]
    for label, j, power in cols:
        a = mc[:, j] ** power
        b = sc[:, j] ** power
        se = math.sqrt(iid_se(a) ** 2 + batch_means_se(b) ** 2)
        results.append(GewekeResult(label, float(a.mean()), float(b.mean()), float((a.mean() - b.mean()) / se)))
    return results
