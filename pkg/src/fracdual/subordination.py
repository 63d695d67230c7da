"""Time-fractional Cauchy problems solved by subordination.

For the heat semigroup ``p(x, u)`` (free line, or a Dirichlet interval) the
solution of ``D_t^gamma m = Laplacian m`` with ``m(x, 0) = r(x)`` is

    m(x, t) = int_0^inf p(x, u) h(u, t) du                       (INVERSE)
            = (1/gamma) int_0^inf p(x, u) p_alpha(u; 2 - alpha, t) du   (DUAL)

with ``alpha = 1/gamma``.  The two mixing densities agree pointwise, but each
route evaluates its own series so the comparison is a genuine check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate, special

from .density import density_series
from .errors import DomainError, QuadratureError
from .inverse import InverseDensitySpec, h_density, support_upper

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_IMAGE_SWITCH = 0.05  # use images when u < 0.05 L^2, eigenmodes otherwise
_MODE_CUTOFF = 1e-14


class Domain(str, Enum):
    FREE_LINE = "line"
    INTERVAL = "interval"


class SubRoute(str, Enum):
    INVERSE = "inverse"
    DUAL = "dual"
    ABS_Y = "abs-y"


@dataclass(frozen=True)
class Datum:
    """Initial condition: a point mass at ``x0`` or a piecewise-linear table."""

    x0: float | None = None
    xs: np.ndarray | None = None
    ys: np.ndarray | None = None

    def __post_init__(self):
        if (self.x0 is None) == (self.xs is None):
            raise ValueError("give exactly one of x0 (delta) or xs/ys (table)")
        if self.xs is not None:
            xs = np.asarray(self.xs, dtype=float)
            ys = np.asarray(self.ys, dtype=float)
            if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
                raise ValueError("tabulated datum needs matching 1-D xs, ys with at least 2 points")
            if np.any(np.diff(xs) <= 0):
                raise ValueError("tabulated xs must be strictly increasing")
            if not np.all(np.isfinite(ys)):
                raise ValueError("tabulated ys must be finite")
            object.__setattr__(self, "xs", xs)
            object.__setattr__(self, "ys", ys)

    @classmethod
    def delta(cls, x0: float = 0.0) -> "Datum":
        return cls(x0=float(x0))

    @classmethod
    def tabulated(cls, xs, ys) -> "Datum":
        return cls(xs=xs, ys=ys)

    @classmethod
    def from_callable(cls, f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int = 4001) -> "Datum":
        xs = np.linspace(lo, hi, n)
        return cls(xs=xs, ys=np.asarray(f(xs), dtype=float))

    @property
    def is_delta(self) -> bool:
        return self.x0 is not None

    def mass(self) -> float:
        if self.is_delta:
            return 1.0
        return float(integrate.trapezoid(self.ys, self.xs))

    def __call__(self, x):
        if self.is_delta:
            raise TypeError("a delta datum has no pointwise values")
        return np.interp(x, self.xs, self.ys, left=0.0, right=0.0)


def _phi_diff(za, zb):
    """``Phi(zb) - Phi(za)`` for ``za <= zb`` without cancellation in the upper tail."""
    return np.where(za > 0, special.ndtr(-za) - special.ndtr(-zb), special.ndtr(zb) - special.ndtr(za))


def _gauss(x, u):
    return np.exp(-x * x / (4.0 * u)) / math.sqrt(4.0 * math.pi * u)


def _conv_linear(x, u: float, r: Datum):
    """``int G_u(x - y) r(y) dy`` for piecewise-linear ``r``, exact per segment."""
    x = np.asarray(x, dtype=float)
    s = math.sqrt(2.0 * u)
    a, c = r.xs[:-1], r.xs[1:]
    ra = r.ys[:-1]
    slope = (r.ys[1:] - ra) / (c - a)
    xx = x[..., None]
    za, zc = (a - xx) / s, (c - xx) / s
    lin = (ra + slope * (xx - a)) * _phi_diff(za, zc)
    curv = slope * s * (np.exp(-0.5 * za * za) - np.exp(-0.5 * zc * zc)) / _SQRT_2PI
    return (lin + curv).sum(axis=-1)


def heat_semigroup(x, u: float, r: Datum):
    """Free-line heat semigroup ``p(x, u) = int G_u(x - y) r(y) dy``, ``G_u`` of variance ``2u``."""
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    if r.is_delta:
        return _gauss(np.asarray(x, dtype=float) - r.x0, u)
    return _conv_linear(x, u, r)


def _sine_coefficients(n: np.ndarray, r: Datum, L: float) -> np.ndarray:
    norm = math.sqrt(2.0 / L)
    k = n * math.pi / L
    if r.is_delta:
        return norm * np.sin(k * r.x0)
    xs = np.clip(r.xs, 0.0, L)
    ys = np.where((r.xs >= 0) & (r.xs <= L), r.ys, 0.0)
    a, c = xs[:-1], xs[1:]
    keep = c > a
    a, c, ya, yc = a[keep], c[keep], ys[:-1][keep], ys[1:][keep]
    B = (yc - ya) / (c - a)
    A = ya - B * a
    kk = k[:, None]

    def prim(y):
        return -(A + B * y) * np.cos(kk * y) / kk + B * np.sin(kk * y) / kk**2

    return norm * (prim(c) - prim(a)).sum(axis=1)


def _dirichlet_images(x, u: float, r: Datum, L: float):
    x = np.asarray(x, dtype=float)
    K = int(math.ceil((L + math.sqrt(160.0 * u)) / (2.0 * L))) + 1
    out = np.zeros_like(x)
    for k in range(-K, K + 1):
        shift = 2.0 * k * L
        out += heat_semigroup(x - shift, u, r) - heat_semigroup(shift - x, u, r)
    return out


def _dirichlet_modes(x, u: float, r: Datum, L: float):
    x = np.asarray(x, dtype=float)
    n_max = max(1, int(math.ceil(L / math.pi * math.sqrt(-math.log(_MODE_CUTOFF) / u))))
    n = np.arange(1, n_max + 1, dtype=float)
    amp = np.exp(-((n * math.pi / L) ** 2) * u) * _sine_coefficients(n, r, L)
    phi = math.sqrt(2.0 / L) * np.sin(np.multiply.outer(x, n) * math.pi / L)
    return phi @ amp


def dirichlet_interval_semigroup(x, u: float, r: Datum, L: float):
    """Heat semigroup on ``(0, L)`` killed at both ends.

    Sine eigenexpansion for ``u >= 0.05 L^2``; for smaller ``u`` the
    equivalent method of images, which needs only a handful of reflections.
    """
    if not L > 0:
        raise DomainError(f"interval length must be positive, got {L}")
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    x = np.asarray(x, dtype=float)
    if u < _IMAGE_SWITCH * L * L:
        val = _dirichlet_images(x, u, r, L)
    else:
        val = _dirichlet_modes(x, u, r, L)
    return np.where((x <= 0) | (x >= L), 0.0, val)


@dataclass(frozen=True)
class QuadPolicy:
    epsabs: float = 1e-10
    epsrel: float = 1e-10
    log_eps: float = -60.0
    limit: int = 400


@dataclass(frozen=True)
class SubordinationSpec:
    gamma: float
    r: Datum = field(default_factory=Datum.delta)
    domain: Domain = Domain.FREE_LINE
    length: float | None = None
    route: SubRoute = SubRoute.INVERSE
    quad: QuadPolicy = field(default_factory=QuadPolicy)

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        object.__setattr__(self, "route", SubRoute(self.route))
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.route is SubRoute.DUAL and self.gamma < 0.5:
            raise DomainError(f"dual route needs 1/2 <= gamma < 1, got {self.gamma}")
        # |Y(t)| has the right one-dimensional law only in the Brownian case
        if self.route is SubRoute.ABS_Y and self.gamma != 0.5:
            raise DomainError("the |Y(t)| route is valid only for gamma = 1/2")
        if self.domain is Domain.INTERVAL:
            if self.length is None or not self.length > 0:
                raise DomainError("interval domain needs a positive length")
            if self.r.is_delta and not 0.0 < self.r.x0 < self.length:
                raise DomainError(f"delta datum must sit inside (0, {self.length})")

    def with_route(self, route: SubRoute | str) -> "SubordinationSpec":
        return SubordinationSpec(self.gamma, self.r, self.domain, self.length, SubRoute(route), self.quad)

    def semigroup(self, x, u: float):
        if self.domain is Domain.FREE_LINE:
            return heat_semigroup(x, u, self.r)
        return dirichlet_interval_semigroup(x, u, self.r, self.length)


def mixing_density(spec: SubordinationSpec, u: float, t: float) -> float:
    """Density of the random diffusion time at ``u`` for the chosen route."""
    g = spec.gamma
    if spec.route is SubRoute.INVERSE:
        return h_density(u, InverseDensitySpec(g, 1.0, t))
    alpha = 1.0 / g
    f = t ** (-1.0 / alpha)
    if spec.route is SubRoute.DUAL:
        return alpha * f * density_series(f * u, alpha, 2.0 - alpha)
    # gamma = 1/2: |Y(t)| with Y Brownian of variance 2t
    return 2.0 * f * density_series(f * u, 2.0, 0.0)


def subordinate(spec: SubordinationSpec, x: float, t: float) -> float:
    """``m(x, t) = int_0^inf p(x, u) w(u, t) du`` for the route's mixing density ``w``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if spec.domain is Domain.INTERVAL and not 0.0 < x < spec.length:
        return 0.0
    q = spec.quad
    c = t**spec.gamma
    u_hi = support_upper(spec.gamma, 1.0, t, q.log_eps)
    s_hi = math.log(u_hi / c)
    s_lo = 60.0

    def f(s, sign):
        u = c * math.exp(sign * s)
        return float(spec.semigroup(x, u)) * mixing_density(spec, u, t) * u

    total = 0.0
    for sign, upper in ((-1.0, s_lo), (1.0, s_hi)):
        val, err, *info = integrate.quad(
            f, 0.0, upper, args=(sign,), epsabs=q.epsabs, epsrel=q.epsrel, limit=q.limit, full_output=1
        )
        if len(info) > 1 and err > 1e3 * q.epsabs:
            raise QuadratureError(f"mixing integral at x={x}, t={t}: {info[1]}")
        total += val
    return total


def subordinate_grid(spec: SubordinationSpec, xs, t: float) -> np.ndarray:
    return np.array([subordinate(spec, float(x), t) for x in np.asarray(xs, dtype=float)])
