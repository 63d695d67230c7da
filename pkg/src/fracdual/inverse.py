"""Density of the inverse stable subordinator and the Mittag-Leffler function.

``E_t = inf{x > 0 : D(x) > t}`` for a stable subordinator ``D`` with
``E exp(-s D(x)) = exp(-b x s^gamma)``.  Its density ``h(x, t)`` is evaluated
either from the subordinator density by self-similarity or, for
``gamma >= 1/2``, as ``alpha`` times the density of a spectrally negative
stable motion with index ``alpha = 1/gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np
from scipy import integrate, interpolate

from .density import density_series, light_tail_log_bound
from .errors import DomainError, NonConvergenceError, QuadratureError


class Route(str, Enum):
    SELF_SIMILAR = "self-similar"
    DUALITY = "duality"


@dataclass(frozen=True)
class InverseDensitySpec:
    gamma: float
    b: float = 1.0
    t: float = 1.0
    route: Route = Route.SELF_SIMILAR

    def __post_init__(self):
        object.__setattr__(self, "route", Route(self.route))
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.b > 0 or not self.t > 0:
            raise DomainError(f"b > 0 and t > 0 required, got b={self.b}, t={self.t}")
        if self.route is Route.DUALITY and self.gamma < 0.5:
            raise DomainError(f"duality route needs gamma >= 1/2, got {self.gamma}")

    @property
    def alpha(self) -> float:
        return 1.0 / self.gamma

    def at(self, t: float) -> "InverseDensitySpec":
        return InverseDensitySpec(self.gamma, self.b, t, self.route)

    def with_route(self, route: Route | str) -> "InverseDensitySpec":
        return InverseDensitySpec(self.gamma, self.b, self.t, Route(route))


def subordinator_density(y: float, gamma: float, b: float = 1.0) -> float:
    """Density ``g_gamma(y) = p_gamma(y; gamma, b)`` of ``D(1)``."""
    if y <= 0:
        return 0.0
    f = b ** (-1.0 / gamma)
    return f * density_series(f * y, gamma, gamma)


def h_density(x: float, spec: InverseDensitySpec) -> float:
    """Density of ``E_t`` at ``x > 0``."""
    if not x > 0:
        raise DomainError(f"h(x, t) is defined for x > 0, got {x}")
    g = spec.gamma
    if spec.route is Route.SELF_SIMILAR:
        y = spec.t * x ** (-1.0 / g)
        return spec.t / g * x ** (-1.0 - 1.0 / g) * subordinator_density(y, g, spec.b)
    alpha = 1.0 / g
    s = spec.b ** (-alpha) * spec.t
    if g == 0.5:
        return 2.0 * math.exp(-x * x / (4.0 * s)) / math.sqrt(4.0 * math.pi * s)
    f = s ** (-1.0 / alpha)
    return alpha * f * density_series(f * x, alpha, 2.0 - alpha)


def h_values(xs, spec: InverseDensitySpec) -> np.ndarray:
    return np.array([h_density(float(x), spec) for x in np.asarray(xs, dtype=float)])


def tail_log_bound(x: float, gamma: float, b: float, t: float) -> float:
    """Chernoff bound on ``log P(E_t > x) = log P(D(x) < t)``."""
    if x <= 0:
        return 0.0
    return light_tail_log_bound(t / (b * x) ** (1.0 / gamma), gamma)


def support_upper(gamma: float, b: float = 1.0, t: float = 1.0, log_eps: float = -60.0) -> float:
    """Point beyond which ``E_t`` has mass below ``exp(log_eps)`` (Chernoff)."""
    return t / (b * gamma) * (-log_eps * gamma / ((1.0 - gamma) * t)) ** (1.0 - gamma)


def mean_inverse(gamma: float, b: float = 1.0, t: float = 1.0) -> float:
    """``E[E_t] = t^gamma / (b Gamma(1 + gamma))``."""
    return t**gamma / (b * math.gamma(1.0 + gamma))


def _ml_series(beta: float, z: float) -> float:
    if z >= 0:
        terms = []
        k = 0
        while True:
            term = math.exp(k * math.log(z) - math.lgamma(1.0 + beta * k)) if z > 0 else float(k == 0)
            terms.append(term)
            if k > 2 and term < 1e-18 * sum(terms):
                return math.fsum(terms)
            k += 1
            if k > 2000:
                raise NonConvergenceError(f"Mittag-Leffler series did not converge at z={z}")
    # alternating: carry enough digits to cover the largest term
    with mpmath.workdps(40):
        zm, bm = mpmath.mpf(z), mpmath.mpf(beta)
        acc = mpmath.mpf(0)
        k = 0
        while True:
            term = zm**k / mpmath.gamma(1 + bm * k)
            acc += term
            if k > 2 and abs(term) < mpmath.mpf(10) ** -30 and abs(term) < abs(acc) * mpmath.mpf(10) ** -25:
                return float(acc)
            k += 1
            if k > 2000:
                raise NonConvergenceError(f"Mittag-Leffler series did not converge at z={z}")


def _ml_integral(beta: float, z: float) -> float:
    # E_beta(-w) = sin(beta pi)/(beta pi) int_0^inf exp(-s^(1/beta) w^(1/beta)) / (s^2 + 2 s cos(beta pi) + 1) ds
    w = (-z) ** (1.0 / beta)
    c = math.cos(beta * math.pi)

    def f(s):
        return math.exp(-(s ** (1.0 / beta)) * w) / (s * s + 2.0 * s * c + 1.0)

    val, err = integrate.quad(f, 0.0, math.inf, epsabs=1e-15, epsrel=1e-12, limit=400)
    if err > 1e-10:
        raise QuadratureError(f"Mittag-Leffler integral error estimate {err:.2g} at z={z}")
    return math.sin(beta * math.pi) / (beta * math.pi) * val


def mittag_leffler(beta: float, z: float) -> float:
    """One-parameter Mittag-Leffler function ``E_beta(z) = sum z^k / Gamma(1 + beta k)``.

    Supported for ``0 < beta <= 1`` and ``z <= 5``.  Beyond ``z < -5`` the
    alternating series is replaced by the real-line integral representation.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if z == 0.0:
        return 1.0
    if beta == 1.0:
        return math.exp(z)
    if z > 5.0:
        raise NonConvergenceError(f"Mittag-Leffler supported for z <= 5 only, got {z}")
    if z >= -5.0:
        return _ml_series(beta, z)
    return _ml_integral(beta, z)


def integrate_h(spec: InverseDensitySpec, weight=None, *, log_eps: float = -60.0, epsabs: float = 1e-11) -> float:
    """``int_0^inf weight(x) h(x, t) dx`` on the numerical support of ``E_t``.

    Uses ``x = u/(1-u)`` and stops at the Chernoff point where the neglected
    mass is below ``exp(log_eps)``.
    """
    x_hi = support_upper(spec.gamma, spec.b, spec.t, log_eps)
    u_hi = x_hi / (1.0 + x_hi)
    mode = min(mean_inverse(spec.gamma, spec.b, spec.t), 0.5 * x_hi)
    u_mid = mode / (1.0 + mode)

    def f(u):
        x = u / (1.0 - u)
        val = h_density(x, spec) / (1.0 - u) ** 2
        return val * weight(x) if weight is not None else val

    total = 0.0
    for lo, hi in ((0.0, u_mid), (u_mid, u_hi)):
        val, err, *rest = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=1e-12, limit=400, full_output=1)
        if rest and len(rest) > 1 and err > 1e3 * epsabs:
            raise QuadratureError(f"integral of h failed on u in [{lo:g}, {hi:g}]: {rest[1]}")
        total += val
    return total


def laplace_check(spec: InverseDensitySpec, z: float) -> tuple[float, float]:
    """Both sides of ``int_0^inf exp(-z x) h(x, t) dx = E_gamma(-z t^gamma / b)``."""
    if z < 0:
        raise DomainError(f"z must be nonnegative, got {z}")
    lhs = integrate_h(spec, lambda x: math.exp(-z * x))
    rhs = mittag_leffler(spec.gamma, -z * spec.t**spec.gamma / spec.b)
    return lhs, rhs


def cdf_table(spec: InverseDensitySpec, n_cells: int = 400, order: int = 8, log_eps: float = -40.0):
    """Nodes and cumulative distribution of ``E_t`` by Gauss-Legendre cell sums."""
    x_hi = support_upper(spec.gamma, spec.b, spec.t, log_eps)
    edges = np.linspace(0.0, x_hi, n_cells + 1)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mass = np.empty(n_cells)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        xs = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        mass[i] = 0.5 * (hi - lo) * np.dot(weights, h_values(xs, spec))
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    return edges, cdf


def cdf_function(spec: InverseDensitySpec, **kw):
    """Vectorized CDF of ``E_t``: cubic Hermite interpolation of :func:`cdf_table` with slope ``h``."""
    edges, cdf = cdf_table(spec, **kw)
    # h(0+, t) is finite; approach it from just inside the first cell
    slopes = h_values(np.maximum(edges, 1e-9 * edges[1]), spec)
    spline = interpolate.CubicHermiteSpline(edges, cdf, slopes, extrapolate=False)

    def F(x):
        x = np.asarray(x, dtype=float)
        val = np.where(x <= 0, 0.0, np.where(x >= edges[-1], cdf[-1], spline(np.clip(x, 0.0, edges[-1]))))
        return np.clip(val, 0.0, 1.0)

    return F
