"""Latent-state containers and AR(1) state equations.

Log-volatility and shape both follow

    s_t = phi * s_{t-1} + exo_t @ beta + e_t,    e_t ~ N(0, sigma2)

without an intercept; a constant exogenous column plays that role when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class StateEqSpec:
    phi: float
    sigma2: float
    exo_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exo_series: np.ndarray | None = None

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError(f"state innovation variance must be positive, got {self.sigma2}")
        coeffs = np.atleast_1d(np.asarray(self.exo_coeffs, dtype=float))
        object.__setattr__(self, "exo_coeffs", coeffs)
        if self.exo_series is not None:
            ser = np.asarray(self.exo_series, dtype=float)
            if ser.ndim == 1:
                ser = ser[:, None]
            if ser.shape[1] != coeffs.size:
                raise DomainError(
                    f"{coeffs.size} exogenous coefficients for {ser.shape[1]} exogenous columns"
                )
            object.__setattr__(self, "exo_series", ser)
        elif coeffs.size:
            raise DomainError("exogenous coefficients given without an exogenous series")

    @property
    def n_exo(self) -> int:
        return self.exo_coeffs.size

    def offsets(self, T: int | None = None) -> np.ndarray:
        """Exogenous contribution exo_t @ beta for t = 1..T (zeros if none)."""
        if self.exo_series is None:
            return np.zeros(0 if T is None else T)
        off = self.exo_series @ self.exo_coeffs
        if T is not None:
            if off.size < T:
                raise DomainError(f"exogenous series has {off.size} rows, need {T}")
            off = off[:T]
        return off

    def with_params(self, **kw) -> StateEqSpec:
        return replace(self, **kw)


@dataclass
class LatentPaths:
    h: np.ndarray
    log_h0: float
    lam: np.ndarray
    lambda0: float
    v: np.ndarray
    o: np.ndarray

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.o = np.asarray(self.o, dtype=float)
        T = self.h.size
        if not (self.lam.size == self.v.size == self.o.size == T):
            raise DomainError("latent paths must all have the same length")
        if np.any(self.h <= 0):
            raise DomainError("volatility path must be strictly positive")
        if np.any(self.v < 0):
            raise DomainError("v must be non-negative")
        if np.any(self.o <= 0):
            raise DomainError("o must be strictly positive")

    @property
    def T(self) -> int:
        return self.h.size

    @property
    def log_h(self) -> np.ndarray:
        return np.log(self.h)

    def copy(self) -> LatentPaths:
        return LatentPaths(
            self.h.copy(), self.log_h0, self.lam.copy(), self.lambda0, self.v.copy(), self.o.copy()
        )


def transition_logh(log_h_prev: float, spec: StateEqSpec, innovation: float, exo_row=None) -> float:
    out = spec.phi * log_h_prev + innovation
    if spec.n_exo:
        out += _exo_term(spec, exo_row)
    return float(out)


def transition_lambda(lambda_prev: float, spec: StateEqSpec, exo_row, innovation: float) -> float:
    return float(spec.phi * lambda_prev + _exo_term(spec, exo_row) + innovation)


def _exo_term(spec: StateEqSpec, exo_row) -> float:
    row = np.atleast_1d(np.asarray([] if exo_row is None else exo_row, dtype=float))
    if row.size != spec.n_exo:
        raise DomainError(f"exogenous row has {row.size} entries, expected {spec.n_exo}")
    return float(row @ spec.exo_coeffs) if row.size else 0.0


def simulate_ar1(
    s0: float,
    phi: float,
    sigma2: float,
    offsets,
    rng: np.random.Generator,
    T: int | None = None,
    size: int | None = None,
) -> np.ndarray:
    """Simulate s_1..s_T from s_0 with per-period offsets.

    With ``size`` given, returns a (size, T) array of independent paths.
    """
    offsets = np.asarray(offsets, dtype=float)
    if T is None:
        T = offsets.size
    if offsets.size == 0:
        offsets = np.zeros(T)
    n = 1 if size is None else size
    eps = rng.standard_normal((n, T)) * np.sqrt(sigma2)
    out = np.empty((n, T))
    prev = np.broadcast_to(np.asarray(s0, dtype=float), (n,)).copy()
    for t in range(T):
        prev = phi * prev + offsets[t] + eps[:, t]
        out[:, t] = prev
    return out[0] if size is None else out


def simulate_state(spec: StateEqSpec, s0: float, T: int, rng: np.random.Generator) -> np.ndarray:
    return simulate_ar1(s0, spec.phi, spec.sigma2, spec.offsets(T) if spec.n_exo else np.zeros(T), rng, T)
