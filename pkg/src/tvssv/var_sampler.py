"""Gibbs sampler for the VAR with per-equation volatility and skewness.

    y_t = Pi X_t + u_t,   A u_t = H_t^{1/2} eps_t,   X_t = [1, y_{t-1}', ..., y_{t-p}']

with A lower unitriangular and independent standardized skew shocks per
equation.  Given A, the orthogonalized residuals e_t = A u_t decouple the
equations, so each equation's latent block reuses the univariate conditionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .draws import PosteriorDraws
from .errors import ConfigError, DomainError, NumericalError, ParticleCollapseError
from .skewdist import ShockFamily, SkewNormal, SkewT, one_minus_delta2, skew_params
from .uni_sampler import (
    McmcConfig,
    StatePrior,
    UniState,
    draw_latent_from_prior,
    draw_mixing_o,
    draw_mixing_v,
    draw_vo_prior,
    gaussian_regression_draw,
    update_latent,
)


@dataclass
class VarModelSpec:
    """Data and structure of a VAR(p).

    ``Y`` holds the T modeled periods, ``presample`` the p periods before them.
    ``shape_exo[i]`` (T, k_i) enters equation i's skewness state equation; its
    columns are lagged endogenous variables described by ``shape_designs[i]``.
    """

    Y: np.ndarray
    presample: np.ndarray
    lags: int
    family: ShockFamily = field(default_factory=SkewNormal)
    names: list[str] | None = None
    shape_exo: list | None = None
    shape_designs: list | None = None

    def __post_init__(self):
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        self.presample = np.atleast_2d(np.asarray(self.presample, dtype=float))
        if self.lags < 1:
            raise DomainError("VAR needs at least one lag")
        if self.presample.shape != (self.lags, self.N):
            raise DomainError(f"presample must be ({self.lags}, {self.N})")
        if self.names is None:
            self.names = [f"y{i + 1}" for i in range(self.N)]
        if len(self.names) != self.N:
            raise DomainError("one name per variable required")
        if self.shape_exo is None:
            self.shape_exo = [None] * self.N
        if self.shape_designs is None:
            self.shape_designs = [None] * self.N
        fixed = []
        for m in self.shape_exo:
            if m is not None:
                m = np.asarray(m, dtype=float).reshape(self.T, -1)
                if m.shape[1] == 0:
                    m = None
            fixed.append(m)
        self.shape_exo = fixed
        self.X = lagged_regressors(self.Y, self.presample, self.lags)

    @property
    def T(self) -> int:
        return self.Y.shape[0]

    @property
    def N(self) -> int:
        return self.Y.shape[1]

    @property
    def k(self) -> int:
        return 1 + self.N * self.lags

    @property
    def nu(self) -> float:
        return self.family.nu

    def k_shape(self, i: int) -> int:
        m = self.shape_exo[i]
        return 0 if m is None else m.shape[1]


def lagged_regressors(Y, presample, lags: int) -> np.ndarray:
    """Rows X_t = [1, y_{t-1}', ..., y_{t-p}'] for every modeled period."""
    full = np.vstack([presample, Y])
    T = Y.shape[0]
    cols = [np.ones((T, 1))]
    for l in range(1, lags + 1):
        cols.append(full[lags - l : lags - l + T])
    return np.hstack(cols)


@dataclass
class VarPriorSpec:
    """Normal prior on Pi (independent elements), Normal prior on the free
    elements of A, and one state-equation prior per equation."""

    pi_mean: np.ndarray
    pi_var: np.ndarray
    state: list[StatePrior]
    a_mean: float = 0.0
    a_var: float = 100.0

    def __post_init__(self):
        self.pi_mean = np.asarray(self.pi_mean, dtype=float)
        self.pi_var = np.asarray(self.pi_var, dtype=float)
        if self.pi_mean.shape != self.pi_var.shape or self.pi_mean.ndim != 2:
            raise ConfigError("pi_mean and pi_var must be (N, k) arrays of the same shape")
        if np.any(self.pi_var <= 0) or self.a_var <= 0:
            raise ConfigError("prior variances must be positive")
        if len(self.state) != self.pi_mean.shape[0]:
            raise ConfigError("one state prior per equation required")

    @property
    def N(self) -> int:
        return self.pi_mean.shape[0]


@dataclass
class VarState:
    Pi: np.ndarray
    A: np.ndarray
    eq: list[UniState]

    def copy(self) -> VarState:
        return VarState(self.Pi.copy(), self.A.copy(), [s.copy() for s in self.eq])

    def a_free(self) -> list[np.ndarray]:
        return [self.A[i, :i].copy() for i in range(self.A.shape[0])]


def unitriangular(a_free: list) -> np.ndarray:
    N = len(a_free)
    A = np.eye(N)
    for i, row in enumerate(a_free):
        A[i, :i] = row
    return A


# ---------------------------------------------------------------------------
# conditionals


def _shock_moments(st: VarState, nu: float):
    """Per-equation conditional mean and variance of e_t = A u_t given v, o: (T, N) each."""
    means, vars_ = [], []
    for s in st.eq:
        zeta, omega, delta = skew_params(s.lam, nu)
        sh = np.exp(0.5 * s.log_h)
        means.append(sh * (zeta + omega * delta * s.v / np.sqrt(s.o)))
        vars_.append(np.exp(s.log_h) * omega**2 * one_minus_delta2(s.lam) / s.o)
    return np.column_stack(means), np.column_stack(vars_)


def draw_Pi(model: VarModelSpec, st: VarState, prior: VarPriorSpec, rng: np.random.Generator) -> np.ndarray:
    """Joint Normal draw of Pi (N x k); vec ordering is equation-major."""
    N, k = model.N, model.k
    mu, d = _shock_moments(st, model.nu)
    if not np.all(np.isfinite(d) & (d > 0)):
        raise NumericalError("non-positive shock variance in coefficient draw")
    A = st.A
    Ainv = linalg.solve_triangular(A, np.eye(N), lower=True, unit_diagonal=True)
    yt = model.Y - mu @ Ainv.T
    # S_t = A' D_t^-1 A
    S = np.einsum("ji,tj,jk->tik", A, 1.0 / d, A)
    X = model.X
    P = np.einsum("tij,ta,tb->iajb", S, X, X).reshape(N * k, N * k)
    b = np.einsum("tij,tj,ta->ia", S, yt, X).reshape(N * k)
    prec0 = 1.0 / prior.pi_var.reshape(-1)
    P[np.diag_indices_from(P)] += prec0
    b += prec0 * prior.pi_mean.reshape(-1)
    try:
        L = np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NumericalError("posterior precision of Pi is not positive definite") from None
    mean = linalg.cho_solve((L, True), b)
    draw = mean + linalg.solve_triangular(L.T, rng.standard_normal(N * k), lower=False)
    return draw.reshape(N, k)


def draw_A(U, st: VarState, nu: float, prior: VarPriorSpec, rng: np.random.Generator) -> np.ndarray:
    """Row-by-row Normal draws of the free elements of A given residuals U (T, N)."""
    N = U.shape[1]
    mu, d = _shock_moments(st, nu)
    A = np.eye(N)
    for i in range(1, N):
        target = U[:, i] - mu[:, i]
        Z = -U[:, :i]
        A[i, :i] = gaussian_regression_draw(
            Z, target, 1.0 / d[:, i], np.full(i, prior.a_mean), np.eye(i) / prior.a_var, rng
        )
    return A


def var_gibbs_step(st: VarState, model: VarModelSpec, prior: VarPriorSpec, cfg: McmcConfig,
                   rng: np.random.Generator) -> VarState:
    """One sweep: v and [o] per equation, Pi, A, then every equation's state block."""
    nu = model.nu
    U = model.Y - model.X @ st.Pi.T
    E = U @ st.A.T
    for i, s in enumerate(st.eq):
        h = np.exp(s.log_h)
        s.v = draw_mixing_v(E[:, i], h, s.lam, s.o, nu, rng)
        if isinstance(model.family, SkewT):
            s.o, _ = draw_mixing_o(E[:, i], h, s.lam, s.v, s.o, nu, rng)
    st.Pi = draw_Pi(model, st, prior, rng)
    U = model.Y - model.X @ st.Pi.T
    st.A = draw_A(U, st, nu, prior, rng)
    E = U @ st.A.T
    for i, s in enumerate(st.eq):
        update_latent(s, E[:, i], nu, None, model.shape_exo[i], prior.state[i], cfg, rng)
    return st


# ---------------------------------------------------------------------------
# prior simulation and data generation


def draw_var_state_from_prior(model: VarModelSpec, prior: VarPriorSpec, rng: np.random.Generator) -> VarState:
    N = model.N
    Pi = prior.pi_mean + np.sqrt(prior.pi_var) * rng.standard_normal(prior.pi_mean.shape)
    A = np.eye(N)
    for i in range(1, N):
        A[i, :i] = prior.a_mean + math.sqrt(prior.a_var) * rng.standard_normal(i)
    eq = [
        draw_latent_from_prior(np.zeros(0), model.T, model.nu, None, model.shape_exo[i], prior.state[i], rng)
        for i in range(N)
    ]
    return VarState(Pi, A, eq)


def simulate_var_data(st: VarState, presample, lags: int, nu: float, rng: np.random.Generator,
                      redraw_mixing: bool = True) -> np.ndarray:
    """Simulate Y (T, N) sequentially from the presample given parameters and paths.

    With ``redraw_mixing`` the mixing variables are first redrawn from their prior.
    """
    N = st.A.shape[0]
    T = st.eq[0].log_h.size
    E = np.empty((T, N))
    for i, s in enumerate(st.eq):
        if redraw_mixing:
            s.v, s.o = draw_vo_prior(s.lam, nu, rng)
        zeta, omega, delta = skew_params(s.lam, nu)
        z = rng.standard_normal(T)
        eps = zeta + omega / np.sqrt(s.o) * (delta * s.v + np.sqrt(one_minus_delta2(s.lam)) * z)
        E[:, i] = np.exp(0.5 * s.log_h) * eps
    U = linalg.solve_triangular(st.A, E.T, lower=True, unit_diagonal=True).T
    hist = [np.asarray(r, dtype=float) for r in np.atleast_2d(presample)]
    Y = np.empty((T, N))
    for t in range(T):
        x = np.concatenate([[1.0]] + [hist[-l] for l in range(1, lags + 1)])
        Y[t] = st.Pi @ x + U[t]
        hist.append(Y[t])
    return Y


# ---------------------------------------------------------------------------
# chain driver


def initial_var_state(model: VarModelSpec, prior: VarPriorSpec, rng: np.random.Generator) -> VarState:
    N, T = model.N, model.T
    P0 = 1.0 / prior.pi_var
    Pi = np.empty((N, model.k))
    for i in range(N):
        # ridge-regularized OLS so short samples still start somewhere sensible
        G = model.X.T @ model.X + np.diag(P0[i])
        Pi[i] = np.linalg.solve(G, model.X.T @ model.Y[:, i] + P0[i] * prior.pi_mean[i])
    U = model.Y - model.X @ Pi.T
    eq = []
    for i in range(N):
        lv = math.log(max(float(U[:, i].var()), 1e-8))
        lam = np.zeros(T)
        v, o = draw_vo_prior(lam, model.nu, rng)
        sp = prior.state[i]
        eq.append(UniState(
            np.zeros(0), np.array([0.95]), np.concatenate(([0.95], np.zeros(model.k_shape(i)))),
            sp.sig_eta[1] / (sp.sig_eta[0] + 1.0), sp.sig_xi[1] / (sp.sig_xi[0] + 1.0),
            np.full(T, lv), lv, lam, 0.0, v, o,
        ))
    return VarState(Pi, np.eye(N), eq)


def run_var_chain(
    model: VarModelSpec,
    prior: VarPriorSpec,
    mcmc: McmcConfig,
    init: VarState | None = None,
    rng: np.random.Generator | None = None,
    progress=None,
) -> PosteriorDraws:
    """Run the VAR Gibbs sampler and return retained draws.

    Path arrays carry an equation axis: ``log_h`` is (M, N, T).  ``phi_lam`` is
    zero-padded to the widest skewness equation.
    """
    if model.T <= model.N * model.lags + 1:
        raise DomainError(f"need T > N*p + 1 = {model.N * model.lags + 1} observations")
    if prior.N != model.N or prior.pi_mean.shape[1] != model.k:
        raise ConfigError(f"prior Pi must be ({model.N}, {model.k})")
    for i in range(model.N):
        if prior.state[i].phi_lam_mean.size != 1 + model.k_shape(i):
            raise ConfigError(f"equation {i}: skewness-equation prior size does not match exogenous terms")
    rng = np.random.default_rng(mcmc.seed) if rng is None else rng
    st = initial_var_state(model, prior, rng) if init is None else init.copy()
    N, T, M = model.N, model.T, mcmc.n_keep
    kl = 1 + max(model.k_shape(i) for i in range(N))
    a = {
        "Pi": np.empty((M, N, model.k)),
        "A": np.empty((M, N, N)),
        "phi_h": np.empty((M, N, 1)),
        "phi_lam": np.zeros((M, N, kl)),
        "sig_eta": np.empty((M, N)),
        "sig_xi": np.empty((M, N)),
        "log_h0": np.empty((M, N)),
        "lam0": np.empty((M, N)),
        "log_h": np.empty((M, N, T)),
        "lam": np.empty((M, N, T)),
    }
    if mcmc.keep_paths:
        a["v"] = np.empty((M, N, T))
        a["o"] = np.empty((M, N, T))
    for it in range(mcmc.iters):
        try:
            var_gibbs_step(st, model, prior, mcmc, rng)
        except ParticleCollapseError as e:
            raise ParticleCollapseError(e.t, f"particle collapse at iteration {it}") from e
        except NumericalError as e:
            raise NumericalError(f"iteration {it}: {e}") from e
        k = it - mcmc.burn_in
        if k >= 0 and k % mcmc.thin == 0 and k // mcmc.thin < M:
            j = k // mcmc.thin
            a["Pi"][j] = st.Pi
            a["A"][j] = st.A
            for i, s in enumerate(st.eq):
                a["phi_h"][j, i] = s.phi_h
                a["phi_lam"][j, i, : s.phi_lam.size] = s.phi_lam
                a["sig_eta"][j, i] = s.sig_eta
                a["sig_xi"][j, i] = s.sig_xi
                a["log_h0"][j, i] = s.log_h0
                a["lam0"][j, i] = s.lam0
                a["log_h"][j, i] = s.log_h
                a["lam"][j, i] = s.lam
                if mcmc.keep_paths:
                    a["v"][j, i] = s.v
                    a["o"][j, i] = s.o
        if progress is not None:
            progress(it + 1, mcmc.iters)
    meta = {
        "model": "var",
        "family": model.family.name,
        "nu": model.nu,
        "lags": model.lags,
        "variables": list(model.names),
        "seed": mcmc.seed,
        "iters": mcmc.iters,
        "burn_in": mcmc.burn_in,
        "thin": mcmc.thin,
        "num_particles": mcmc.num_particles,
        "path_method": mcmc.path_method,
        "shape_exo_terms": [list(map(list, d.terms)) if d is not None else [] for d in model.shape_designs],
    }
    return PosteriorDraws(a, meta)
