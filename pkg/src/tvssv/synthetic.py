"""Synthetic growth / financial-conditions data with time-varying skewness."""

from __future__ import annotations

import math

import numpy as np

from .dataio import SeriesFrame, period_range
from .skewdist import draw_mixing, family_from_name


def simulate_gar_data(
    T: int,
    rng: np.random.Generator,
    family: str = "skew_t",
    nu: float = 5.0,
    intercept: float = 0.5,
    ar: tuple[float, ...] = (0.3, 0.1),
    gamma_nfci: float = -0.3,
    phi_h: float = 0.95,
    sig_eta: float = 0.04,
    phi_lam: float = 0.9,
    sig_xi: float = 0.01,
    beta_lam: float = -0.5,
    nfci_ar: float = 0.9,
    nfci_sd: float = 0.4,
    start: str = "1971-Q1",
    burn: int = 100,
) -> tuple[SeriesFrame, dict]:
    """Simulate columns ``gdp`` and ``nfci``.

    nfci is a Gaussian AR(1).  gdp has an AR mean with one lag of nfci, log
    volatility following an AR(1) and shape lambda_t = phi_lam lambda_{t-1}
    + beta_lam nfci_{t-1} + xi_t.  Returns the frame and the latent paths.
    """
    fam = family_from_name(family, nu)
    n = T + burn
    p = len(ar)
    nfci = np.zeros(n)
    gdp = np.zeros(n)
    log_h = np.zeros(n)
    lam = np.zeros(n)
    for t in range(1, n):
        nfci[t] = nfci_ar * nfci[t - 1] + nfci_sd * rng.standard_normal()
        log_h[t] = phi_h * log_h[t - 1] + math.sqrt(sig_eta) * rng.standard_normal()
        lam[t] = phi_lam * lam[t - 1] + beta_lam * nfci[t - 1] + math.sqrt(sig_xi) * rng.standard_normal()
        mean = intercept + gamma_nfci * nfci[t - 1]
        for l in range(1, p + 1):
            mean += ar[l - 1] * gdp[t - l] if t - l >= 0 else 0.0
        eps = float(draw_mixing(np.array(lam[t]), fam.nu, rng)[3])
        gdp[t] = mean + math.exp(0.5 * log_h[t]) * eps
    sl = slice(burn, n)
    frame = SeriesFrame(period_range(start, T), np.column_stack([gdp[sl], nfci[sl]]), ["gdp", "nfci"],
                        ["level", "level"])
    return frame, {"log_h": log_h[sl], "lam": lam[sl]}
