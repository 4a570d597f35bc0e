"""Skew-Normal and Skew-t shocks standardized to zero mean and unit variance.

Both families are written in the (zeta, omega, lambda[, nu]) form

    eps = zeta + omega * o**-0.5 * (delta * v + sqrt(1 - delta**2) * z)

with v half-normal, z standard normal and o ~ Gamma(nu/2, rate=nu/2)
(o = 1 for the Skew-Normal).  The location zeta and scale omega are pinned
by the shape so that E[eps] = 0 and Var[eps] = 1.

``nu = inf`` is used throughout to denote the Skew-Normal family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
LOG_2 = math.log(2.0)
DELTA_CLAMP = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# shock families


@dataclass(frozen=True)
class SkewNormal:
    """Skew-Normal shocks."""

    @property
    def nu(self) -> float:
        return math.inf

    @property
    def name(self) -> str:
        return "skew_normal"


@dataclass(frozen=True)
class SkewT:
    """Skew-t shocks with fixed degrees of freedom ``nu`` (> 2)."""

    nu: float = 5.0

    def __post_init__(self):
        if not self.nu > 2.0:
            raise DomainError(f"variance undefined for nu={self.nu} (need nu > 2)")

    @property
    def name(self) -> str:
        return "skew_t"


ShockFamily = SkewNormal | SkewT


def family_from_name(name: str, nu: float = 5.0) -> ShockFamily:
    key = name.strip().lower().replace("-", "_")
    if key in ("skew_normal", "sn", "normal"):
        return SkewNormal()
    if key in ("skew_t", "st", "t"):
        return SkewT(float(nu))
    raise DomainError(f"unknown shock family {name!r}")


# ---------------------------------------------------------------------------
# shape algebra


@dataclass(frozen=True)
class ShapeValue:
    lam: float

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise DomainError(f"shape parameter must be finite, got {self.lam}")

    @property
    def delta(self) -> float:
        return delta_of_lambda(self.lam)


def delta_of_lambda(lam):
    """Map the shape parameter to delta = lam / sqrt(1 + lam**2).

    Accepts scalars or arrays; raises :class:`DomainError` on non-finite input.
    """
    arr = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("shape parameter must be finite")
    # lam / hypot(1, lam) avoids overflow of lam**2
    out = arr / np.hypot(1.0, arr)
    if out.ndim == 0:
        return float(out)
    return out


def k_constants(nu: float) -> tuple[float, float]:
    """Return (k1, k2) for the Skew-t; (1, 1) for nu = inf."""
    if math.isinf(nu):
        return 1.0, 1.0
    if not nu > 2.0:
        raise DomainError(f"variance undefined for nu={nu} (need nu > 2)")
    k1 = math.exp(
        0.5 * math.log(nu / 2.0) + math.lgamma((nu - 1.0) / 2.0) - math.lgamma(nu / 2.0)
    )
    k2 = nu / (nu - 2.0)
    return k1, k2


def skew_params(lam, nu: float = math.inf):
    """Vectorized (zeta, omega, delta) for the unit-variance constraint.

    ``1 - delta**2`` is better computed as ``1 / (1 + lam**2)`` by callers that
    need it; see :func:`one_minus_delta2`.
    """
    k1, k2 = k_constants(nu)
    lam = np.asarray(lam, dtype=float)
    delta = np.clip(lam / np.hypot(1.0, lam), -DELTA_CLAMP, DELTA_CLAMP)
    omega2 = 1.0 / (k2 - (2.0 / math.pi) * k1 * k1 * delta * delta)
    omega = np.sqrt(omega2)
    zeta = -omega * delta * k1 * SQRT_2_OVER_PI
    return zeta, omega, delta


def one_minus_delta2(lam):
    lam = np.asarray(lam, dtype=float)
    return np.maximum(1.0 / (1.0 + lam * lam), 1.0 - DELTA_CLAMP**2)


@dataclass(frozen=True)
class ConstrainedSkewNormal:
    zeta: float
    omega2: float
    shape: ShapeValue

    @property
    def omega(self) -> float:
        return math.sqrt(self.omega2)

    @property
    def delta(self) -> float:
        return float(np.clip(self.shape.delta, -DELTA_CLAMP, DELTA_CLAMP))

    @property
    def nu(self) -> float:
        return math.inf

    def moments(self) -> tuple[float, float]:
        d = self.delta
        return (
            self.zeta + self.omega * d * SQRT_2_OVER_PI,
            self.omega2 * (1.0 - 2.0 * d * d / math.pi),
        )


@dataclass(frozen=True)
class ConstrainedSkewT:
    zeta: float
    omega2: float
    shape: ShapeValue
    nu: float
    k1: float = field(default=float("nan"))
    k2: float = field(default=float("nan"))

    @property
    def omega(self) -> float:
        return math.sqrt(self.omega2)

    @property
    def delta(self) -> float:
        return float(np.clip(self.shape.delta, -DELTA_CLAMP, DELTA_CLAMP))

    def moments(self) -> tuple[float, float]:
        d = self.delta
        return (
            self.zeta + self.omega * d * self.k1 * SQRT_2_OVER_PI,
            self.omega2 * (self.k2 - 2.0 / math.pi * self.k1**2 * d * d),
        )


ConstrainedDist = ConstrainedSkewNormal | ConstrainedSkewT


def constrain_skew_normal(shape: ShapeValue | float) -> ConstrainedSkewNormal:
    if not isinstance(shape, ShapeValue):
        shape = ShapeValue(float(shape))
    zeta, omega, _ = skew_params(shape.lam)
    return ConstrainedSkewNormal(float(zeta), float(omega) ** 2, shape)


def constrain_skew_t(shape: ShapeValue | float, nu: float) -> ConstrainedSkewT:
    if not isinstance(shape, ShapeValue):
        shape = ShapeValue(float(shape))
    k1, k2 = k_constants(nu)  # raises for nu <= 2
    zeta, omega, _ = skew_params(shape.lam, nu)
    return ConstrainedSkewT(float(zeta), float(omega) ** 2, shape, float(nu), k1, k2)


def constrain(shape: ShapeValue | float, family: ShockFamily) -> ConstrainedDist:
    if isinstance(family, SkewT):
        return constrain_skew_t(shape, family.nu)
    return constrain_skew_normal(shape)


# ---------------------------------------------------------------------------
# densities


def _log_t_pdf(z, nu):
    return (
        math.lgamma((nu + 1.0) / 2.0)
        - math.lgamma(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
        - (nu + 1.0) / 2.0 * np.log1p(z * z / nu)
    )


def unit_logpdf(z, lam, nu: float = math.inf):
    """Log density of the un-standardized family (location 0, scale 1)."""
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if math.isinf(nu):
        return LOG_2 - 0.5 * z * z - 0.5 * math.log(2.0 * math.pi) + special.log_ndtr(lam * z)
    arg = lam * z * np.sqrt((nu + 1.0) / (nu + z * z))
    tail = special.stdtr(nu + 1.0, arg)
    return LOG_2 + _log_t_pdf(z, nu) + np.log(np.maximum(tail, 1e-300))


def standard_logpdf(x, lam, nu: float = math.inf):
    """Log density of the zero-mean, unit-variance shock with shape ``lam``."""
    zeta, omega, _ = skew_params(lam, nu)
    z = (np.asarray(x, dtype=float) - zeta) / omega
    return unit_logpdf(z, lam, nu) - np.log(omega)


def logpdf(x, dist: ConstrainedDist):
    out = standard_logpdf(x, dist.shape.lam, dist.nu)
    return float(out) if np.ndim(out) == 0 else out


def pdf(x, dist: ConstrainedDist):
    return np.exp(logpdf(x, dist))


# ---------------------------------------------------------------------------
# sampling


def truncnorm_positive(mean, sd, rng: np.random.Generator):
    """Exact draws from N(mean, sd**2) truncated to [0, inf).

    Inverse CDF on the upper tail; exponential rejection once the standardized
    bound is so far out that the tail mass underflows.
    """
    mean, sd = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(sd, dtype=float))
    a = -mean / sd
    u = rng.random(a.shape)
    x = -special.ndtri(u * special.ndtr(-a))
    far = a > 30.0
    if np.any(far):
        x = np.asarray(x, dtype=float).copy()
        x[far] = _tail_rejection(a[far], rng)
    return np.maximum(mean + sd * x, 0.0)


def _tail_rejection(a, rng):
    out = np.empty_like(a)
    todo = np.arange(a.size)
    alpha = (a + np.sqrt(a * a + 4.0)) / 2.0
    while todo.size:
        z = a[todo] - np.log(rng.random(todo.size)) / alpha[todo]
        ok = np.log(rng.random(todo.size)) <= -0.5 * (z - alpha[todo]) ** 2
        out[todo[ok]] = z[ok]
        todo = todo[~ok]
    return out


def draw_mixing(lam, nu: float, rng: np.random.Generator, size=None):
    """Draw (v, o, z) and the implied standardized shock for shapes ``lam``.

    ``lam`` may be an array; ``size`` defaults to its shape.
    """
    lam = np.asarray(lam, dtype=float)
    shape = lam.shape if size is None else size
    v = truncnorm_positive(np.zeros(shape), 1.0, rng)
    z = rng.standard_normal(shape)
    if math.isinf(nu):
        o = np.ones(shape)
    else:
        o = rng.gamma(nu / 2.0, 2.0 / nu, size=shape)
    zeta, omega, delta = skew_params(lam, nu)
    scale = omega / np.sqrt(o)
    x = zeta + scale * (delta * v + np.sqrt(one_minus_delta2(lam)) * z)
    return v, o, z, x


def sample_mixing(dist: ConstrainedDist, rng: np.random.Generator, size=None):
    """Representation-based draws returning the mixing variables as well.

    Returns ``(v, o, z, x)``.
    """
    shape = () if size is None else size
    return draw_mixing(np.full(shape, dist.shape.lam), dist.nu, rng)


def sample(dist: ConstrainedDist, rng: np.random.Generator, size=None):
    x = sample_mixing(dist, rng, size)[3]
    return float(x) if size is None else x


# ---------------------------------------------------------------------------
# distribution function by quadrature


def _unit_cdf_table(lam: float, nu: float, n: int = 8001):
    # z = tan(theta) maps the real line onto (-pi/2, pi/2); the integrand
    # pdf(z) * sec^2(theta) vanishes at both ends for nu > 1.
    theta = np.linspace(-np.pi / 2, np.pi / 2, n)[1:-1]
    z = np.tan(theta)
    dens = np.exp(unit_logpdf(z, lam, nu)) / np.cos(theta) ** 2
    h = theta[1] - theta[0]
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * h)))
    # half-interval end pieces are O(h * small); fold them into normalization
    cum = cum / cum[-1]
    return z, cum


def unit_cdf(z, lam: float, nu: float = math.inf, n: int = 8001):
    grid, cum = _unit_cdf_table(lam, nu, n)
    return np.interp(z, grid, cum)


def unit_ppf(p, lam: float, nu: float = math.inf, n: int = 8001):
    grid, cum = _unit_cdf_table(lam, nu, n)
    return np.interp(p, cum, grid)


def cdf(x, dist: ConstrainedDist, n: int = 8001):
    z = (np.asarray(x, dtype=float) - dist.zeta) / dist.omega
    return unit_cdf(z, dist.shape.lam, dist.nu, n)


@dataclass(frozen=True)
class FreeSkewT:
    """Skew-t with free location, scale, shape and degrees of freedom.

    ``y = loc + scale * Z`` where Z has density 2 t_nu(z) T_{nu+1}(...).
    ``df = inf`` gives the free Skew-Normal.
    """

    loc: float
    scale: float
    shape: float
    df: float

    def logpdf(self, y):
        z = (np.asarray(y, dtype=float) - self.loc) / self.scale
        return unit_logpdf(z, self.shape, self.df) - math.log(self.scale)

    def cdf(self, y):
        return unit_cdf((np.asarray(y, dtype=float) - self.loc) / self.scale, self.shape, self.df)

    def ppf(self, p):
        return self.loc + self.scale * unit_ppf(p, self.shape, self.df)

    def sample(self, rng: np.random.Generator, size: int):
        return self.loc + self.scale * unit_draws(self.shape, self.df, rng, size)

    def standardized(self) -> tuple[float, float, float, float]:
        """Return (loc', scale', lam, nu) with y = loc' + scale' * eps, eps standardized."""
        zeta, omega, _ = skew_params(self.shape, self.df)
        s = self.scale / float(omega)
        return self.loc - s * float(zeta), s, self.shape, self.df


def unit_draws(lam: float, nu: float, rng: np.random.Generator, size: int):
    """Draws of Z = (eps - zeta) / omega, the un-standardized variate."""
    v, o, z, _ = draw_mixing(np.full(size, lam), nu, rng)
    delta = lam / math.hypot(1.0, lam)
    return (delta * v + math.sqrt(1.0 - delta * delta) * z) / np.sqrt(o)
