"""Latent-path updates: conditional SMC with ancestor sampling, and a
single-site Metropolis sweep.

Two implementations of the particle step are provided.  ``csmc_ancestor_sampling``
is generic (arbitrary transition / observation callables) and is what the tests
validate against a Kalman smoother.  ``pgas_ar1`` is a compiled kernel for the
Gaussian AR(1) state equations used by the samplers.  Both consume random
numbers in the same order::

    u_res (T-1, K-1), u_anc (T-1,), u_fin (scalar), then K-1 normals per period

so that, for identical inputs and seed, they return identical paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .errors import ParticleCollapseError
from .skewdist import k_constants

DEFAULT_PARTICLES = 30

KIND_LOGVOL = 0
KIND_SHAPE = 1

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_DELTA_CLAMP = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# generic conditional SMC


@dataclass
class ParticleStepSpec:
    """Inputs of one conditional-SMC sweep.

    ``init_sampler(n, rng)`` draws n states for the first period,
    ``transition(prev, t, rng)`` propagates an array of states to period t,
    ``transition_logpdf(x, prev, t)`` is log f(x | prev) up to a constant,
    ``obs_loglik(states, t)`` is the log observation weight.
    """

    num_particles: int
    init_sampler: Callable
    transition: Callable
    transition_logpdf: Callable
    obs_loglik: Callable
    reference_path: np.ndarray

    def __post_init__(self):
        if self.num_particles < 2:
            raise ValueError("need at least two particles")
        self.reference_path = np.asarray(self.reference_path, dtype=float)


def _normalized_cumsum(logw):
    mx = np.max(logw)
    if not np.isfinite(mx):
        return None
    w = np.exp(logw - mx)
    w[~np.isfinite(w)] = 0.0
    c = np.cumsum(w)
    return c / c[-1]


def _pick(cum, u):
    return np.minimum(np.searchsorted(cum, u, side="right"), cum.size - 1)


def csmc_ancestor_sampling(spec: ParticleStepSpec, rng: np.random.Generator) -> np.ndarray:
    ref = spec.reference_path
    T = ref.size
    K = spec.num_particles
    R = K - 1
    u_res = rng.random((max(T - 1, 0), R))
    u_anc = rng.random(max(T - 1, 0))
    u_fin = rng.random()

    states = np.empty((T, K))
    anc = np.zeros((T, K), dtype=np.int64)
    states[0, :R] = spec.init_sampler(R, rng)
    states[0, R] = ref[0]
    logw = np.asarray(spec.obs_loglik(states[0], 0), dtype=float)
    for t in range(1, T):
        cum = _normalized_cumsum(logw)
        if cum is None:
            raise ParticleCollapseError(t - 1)
        anc[t, :R] = _pick(cum, u_res[t - 1])
        la = logw + spec.transition_logpdf(ref[t], states[t - 1], t)
        cum_a = _normalized_cumsum(la)
        if cum_a is None:
            raise ParticleCollapseError(t)
        anc[t, R] = _pick(cum_a, u_anc[t - 1])
        states[t, :R] = spec.transition(states[t - 1, anc[t, :R]], t, rng)
        states[t, R] = ref[t]
        logw = np.asarray(spec.obs_loglik(states[t], t), dtype=float)
    cum = _normalized_cumsum(logw)
    if cum is None:
        raise ParticleCollapseError(T - 1)
    k = int(_pick(cum, u_fin))
    path = np.empty(T)
    for t in range(T - 1, -1, -1):
        path[t] = states[t, k]
        k = anc[t, k]
    return path


# ---------------------------------------------------------------------------
# observation models for the two state types


@dataclass(frozen=True)
class PathObservation:
    """Observation weights for a log-volatility or shape path.

    For ``KIND_LOGVOL`` the arrays are (r, m, c): residual r_t ~ N(e^{s/2} m_t, e^{s} c_t).
    For ``KIND_SHAPE`` they are (x, v, o): standardized residual x_t = r_t / sqrt(h_t)
    with the shape entering through zeta, omega and delta.
    """

    kind: int
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    k1: float = 1.0
    k2: float = 1.0

    def loglik(self, states, t: int):
        s = np.asarray(states, dtype=float)
        if self.kind == KIND_LOGVOL:
            return _obs_logvol_np(s, self.d1[t], self.d2[t], self.d3[t])
        return _obs_shape_np(s, self.d1[t], self.d2[t], self.d3[t], self.k1, self.k2)


def logvol_observation(r, zeta, omega, delta, v, o, omd2=None) -> PathObservation:
    """Build weights for a log h path from residuals and the current shock state."""
    r = np.asarray(r, dtype=float)
    o = np.asarray(o, dtype=float)
    if omd2 is None:
        omd2 = 1.0 - np.asarray(delta) ** 2
    m = zeta + omega * delta * np.asarray(v) / np.sqrt(o)
    c = omega**2 * omd2 / o
    return PathObservation(KIND_LOGVOL, r, np.asarray(m, float), np.asarray(c, float))


def shape_observation(x, v, o, nu: float) -> PathObservation:
    k1, k2 = k_constants(nu)
    return PathObservation(
        KIND_SHAPE,
        np.asarray(x, dtype=float),
        np.asarray(v, dtype=float),
        np.asarray(o, dtype=float),
        k1,
        k2,
    )


def _obs_logvol_np(s, r, m, c):
    return -0.5 * s - 0.5 * np.log(c) - (r * np.exp(-0.5 * s) - m) ** 2 / (2.0 * c)


def _obs_shape_np(lam, x, v, o, k1, k2):
    delta = np.clip(lam / np.hypot(1.0, lam), -_DELTA_CLAMP, _DELTA_CLAMP)
    omd2 = np.maximum(1.0 / (1.0 + lam * lam), 1.0 - _DELTA_CLAMP**2)
    omega2 = 1.0 / (k2 - (2.0 / math.pi) * k1 * k1 * delta * delta)
    omega = np.sqrt(omega2)
    zeta = -omega * delta * k1 * _SQRT_2_OVER_PI
    var = omega2 * omd2 / o
    mean = zeta + omega * delta * v / np.sqrt(o)
    return -0.5 * np.log(var) - (x - mean) ** 2 / (2.0 * var)


@numba.njit(cache=True)
def _obs_one(kind, s, a, b, c, k1, k2):
    if kind == 0:
        e = a * math.exp(-0.5 * s) - b
        return -0.5 * s - 0.5 * math.log(c) - e * e / (2.0 * c)
    lam = s
    h = math.sqrt(1.0 + lam * lam)
    delta = lam / h
    if delta > _DELTA_CLAMP:
        delta = _DELTA_CLAMP
    elif delta < -_DELTA_CLAMP:
        delta = -_DELTA_CLAMP
    omd2 = 1.0 / (1.0 + lam * lam)
    floor = 1.0 - _DELTA_CLAMP * _DELTA_CLAMP
    if omd2 < floor:
        omd2 = floor
    omega2 = 1.0 / (k2 - (2.0 / math.pi) * k1 * k1 * delta * delta)
    omega = math.sqrt(omega2)
    zeta = -omega * delta * k1 * _SQRT_2_OVER_PI
    var = omega2 * omd2 / c
    e = a - zeta - omega * delta * b / math.sqrt(c)
    return -0.5 * math.log(var) - e * e / (2.0 * var)


# ---------------------------------------------------------------------------
# compiled particle step for Gaussian AR(1) states


@numba.njit(cache=True)
def _search(cum, u):
    # first index with cum[i] > u, clipped (matches searchsorted side='right')
    lo = 0
    hi = cum.size
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    if lo >= cum.size:
        lo = cum.size - 1
    return lo


@numba.njit(cache=True)
def _cum_weights(logw, out):
    mx = -np.inf
    for k in range(logw.size):
        if logw[k] > mx:
            mx = logw[k]
    if not np.isfinite(mx):
        return False
    acc = 0.0
    for k in range(logw.size):
        w = math.exp(logw[k] - mx)
        if not np.isfinite(w):
            w = 0.0
        acc += w
        out[k] = acc
    for k in range(logw.size):
        out[k] /= acc
    return True


@numba.njit(cache=True)
def _pgas_kernel(ref, s0, phi, off, sd, kind, d1, d2, d3, k1, k2, u_res, u_anc, u_fin, normals):
    T = ref.size
    K = normals.shape[1] + 1
    R = K - 1
    states = np.empty((T, K))
    anc = np.zeros((T, K), dtype=np.int64)
    logw = np.empty(K)
    la = np.empty(K)
    cum = np.empty(K)
    path = np.empty(T)
    inv2v = 1.0 / (2.0 * sd * sd)
    for k in range(R):
        states[0, k] = phi * s0 + off[0] + sd * normals[0, k]
    states[0, R] = ref[0]
    for k in range(K):
        logw[k] = _obs_one(kind, states[0, k], d1[0], d2[0], d3[0], k1, k2)
    for t in range(1, T):
        if not _cum_weights(logw, cum):
            return path, t - 1
        for k in range(R):
            anc[t, k] = _search(cum, u_res[t - 1, k])
        for k in range(K):
            e = ref[t] - phi * states[t - 1, k] - off[t]
            la[k] = logw[k] - e * e * inv2v
        if not _cum_weights(la, cum):
            return path, t
        anc[t, R] = _search(cum, u_anc[t - 1])
        for k in range(R):
            states[t, k] = phi * states[t - 1, anc[t, k]] + off[t] + sd * normals[t, k]
        states[t, R] = ref[t]
        for k in range(K):
            logw[k] = _obs_one(kind, states[t, k], d1[t], d2[t], d3[t], k1, k2)
    if not _cum_weights(logw, cum):
        return path, T - 1
    k = _search(cum, u_fin)
    for t in range(T - 1, -1, -1):
        path[t] = states[t, k]
        k = anc[t, k]
    return path, -1


def pgas_ar1(
    reference_path,
    s0: float,
    phi: float,
    sigma2: float,
    offsets,
    obs: PathObservation,
    rng: np.random.Generator,
    num_particles: int = DEFAULT_PARTICLES,
) -> np.ndarray:
    """Conditional SMC draw of s_{1:T} for s_t = phi s_{t-1} + offsets_t + N(0, sigma2)."""
    ref = np.ascontiguousarray(reference_path, dtype=float)
    T = ref.size
    K = int(num_particles)
    if K < 2:
        raise ValueError("need at least two particles")
    off = np.zeros(T) if offsets is None or np.size(offsets) == 0 else np.asarray(offsets, float)
    u_res = rng.random((max(T - 1, 0), K - 1))
    u_anc = rng.random(max(T - 1, 0))
    u_fin = rng.random()
    normals = rng.standard_normal((T, K - 1))
    path, bad = _pgas_kernel(
        ref, float(s0), float(phi), off, math.sqrt(sigma2), obs.kind,
        obs.d1, obs.d2, obs.d3, float(obs.k1), float(obs.k2),
        u_res, u_anc, float(u_fin), normals,
    )
    if bad >= 0:
        raise ParticleCollapseError(int(bad))
    return path


def ar1_particle_spec(reference_path, s0, phi, sigma2, offsets, obs: PathObservation,
                      num_particles: int = DEFAULT_PARTICLES) -> ParticleStepSpec:
    """Express the AR(1) model as a generic spec (same random-number order as ``pgas_ar1``)."""
    T = np.size(reference_path)
    off = np.zeros(T) if offsets is None or np.size(offsets) == 0 else np.asarray(offsets, float)
    sd = math.sqrt(sigma2)

    def init(n, rng):
        return phi * s0 + off[0] + sd * rng.standard_normal(n)

    def trans(prev, t, rng):
        return phi * prev + off[t] + sd * rng.standard_normal(prev.size)

    def trans_lpdf(x, prev, t):
        return -((x - phi * prev - off[t]) ** 2) / (2.0 * sigma2)

    return ParticleStepSpec(num_particles, init, trans, trans_lpdf, obs.loglik, reference_path)


# ---------------------------------------------------------------------------
# single-site Metropolis sweep


@numba.njit(cache=True)
def _mh_kernel(path, s0, phi, off, sigma2, kind, d1, d2, d3, k1, k2, normals, uniforms):
    T = path.size
    s = path.copy()
    accepted = 0
    denom = 1.0 + phi * phi
    for t in range(T):
        prev = s0 if t == 0 else s[t - 1]
        if t < T - 1:
            mean = (phi * prev + off[t] + phi * (s[t + 1] - off[t + 1])) / denom
            sd = math.sqrt(sigma2 / denom)
        else:
            mean = phi * prev + off[t]
            sd = math.sqrt(sigma2)
        prop = mean + sd * normals[t]
        lr = _obs_one(kind, prop, d1[t], d2[t], d3[t], k1, k2) - _obs_one(
            kind, s[t], d1[t], d2[t], d3[t], k1, k2
        )
        if math.log(uniforms[t]) < lr:
            s[t] = prop
            accepted += 1
    return s, accepted


def mh_acceptance_logratio(proposed, current, t: int, obs: PathObservation) -> float:
    """Log acceptance ratio of the conditional-prior proposal at period t."""
    return float(obs.loglik(np.array([proposed]), t)[0] - obs.loglik(np.array([current]), t)[0])


def mh_path_update(
    path,
    s0: float,
    phi: float,
    sigma2: float,
    offsets,
    obs: PathObservation,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """One sweep t = 1..T of single-site MH proposing from p(s_t | s_{t-1}, s_{t+1}).

    Returns the updated path and the acceptance rate.
    """
    path = np.ascontiguousarray(path, dtype=float)
    T = path.size
    off = np.zeros(T) if offsets is None or np.size(offsets) == 0 else np.asarray(offsets, float)
    normals = rng.standard_normal(T)
    uniforms = rng.random(T)
    out, acc = _mh_kernel(
        path, float(s0), float(phi), off, float(sigma2), obs.kind,
        obs.d1, obs.d2, obs.d3, float(obs.k1), float(obs.k2), normals, uniforms,
    )
    return out, acc / max(T, 1)
