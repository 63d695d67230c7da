"""Stable densities by convergent series, Fourier inversion, and duality.

Densities are in the ``ZOLOTAREV_ETA`` form ``p_alpha(x; eta, b)``.  Two
families of series are used (``k >= 1``)::

    small-x form  (1/pi) (-1)^(k+1) Gamma(1 + k/alpha)/k! x^(k-1)
                  sin(pi k (eta + alpha) / (2 alpha))
    large-x form  (1/pi) (-1)^(k+1) Gamma(alpha k + 1)/k! x^(-alpha k - 1)
                  sin(pi k (alpha + eta) / 2)

The small-x form converges for ``alpha > 1`` and the large-x form for
``alpha < 1``; the other one is then an asymptotic expansion.  Convergent sums
with heavy cancellation are re-evaluated in multiprecision arithmetic until the
working precision covers the cancellation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DomainError, NonConvergenceError, QuadratureError
from .params import Param, StableParams, dual_params

log = logging.getLogger(__name__)

DEFAULT_SERIES_CAP = 20000
DEFAULT_TOL = 1e-14

# convergent series whose peak term sits beyond this index are avoided when
# another representation is available
_PEAK_SWITCH = 1500
# light-tail points whose Chernoff bound is below exp(_LOG_NEGLIGIBLE) and whose
# series peak lies past _PEAK_SWITCH are reported as exactly zero
_LOG_NEGLIGIBLE = -230.0
_SKEW_TOL = 1e-12
_EPS = 2.0**-52


class Method(str, Enum):
    SERIES = "series"
    QUADRATURE = "quad"
    DUAL = "dual"


class _Coefficients:
    """Lazily grown coefficient tables for one series family and (alpha, eta).

    An asymmetry within ``_SKEW_TOL`` of its range boundary is snapped to the
    exact boundary: in a light tail the result is a tiny difference of huge
    terms, and a few ulps of ``eta`` past the edge would add a spurious heavy
    tail of the same size.
    """

    def __init__(self, small_x: bool, alpha: float, eta: float):
        self.small_x = small_x
        self.alpha = alpha
        self.eta = eta
        bound = alpha if alpha < 1 else 2.0 - alpha
        self.edge = 1 if abs(eta - bound) <= _SKEW_TOL else -1 if abs(eta + bound) <= _SKEW_TOL else 0
        if self.edge == 1:
            self._sum = 2.0 * alpha if alpha < 1 else 2.0
        elif self.edge == -1:
            self._sum = 0.0 if alpha < 1 else 2.0 * alpha - 2.0
        else:
            self._sum = eta + alpha
        self._logc = np.empty(0)
        self._sign = np.empty(0)
        self._mp: dict[int, list] = {}

    def _angle(self, k):
        if self.small_x:
            return k * self._sum / (2.0 * self.alpha)
        return k * self._sum / 2.0

    def _mp_eta(self, a):
        if self.edge == 0:
            return mpmath.mpf(self.eta)
        bound = a if self.alpha < 1 else 2 - a
        return self.edge * bound

    def tables(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """log|coefficient| (without the sine) and signed sine factor, k = 1..n."""
        if self._logc.size < n:
            m = max(n, 2 * self._logc.size, 64)
            k = np.arange(1, m + 1, dtype=float)
            g = gammaln(1.0 + k / self.alpha) if self.small_x else gammaln(self.alpha * k + 1.0)
            self._logc = g - gammaln(k + 1.0) - math.log(math.pi)
            self._sign = np.where(k % 2 == 1, 1.0, -1.0) * np.sin(math.pi * self._angle(k))
        return self._logc[:n], self._sign[:n]

    def exponents(self, n: int) -> np.ndarray:
        k = np.arange(1, n + 1, dtype=float)
        return k - 1.0 if self.small_x else -self.alpha * k - 1.0

    def mp_coeffs(self, n: int, dps: int) -> list:
        cached = self._mp.get(dps, [])
        if len(cached) < n:
            with mpmath.workdps(dps):
                a = mpmath.mpf(self.alpha)
                e = self._mp_eta(a)
                out = list(cached)
                k0 = len(out) + 1
                fact = mpmath.factorial(k0 - 1)
                for k in range(k0, n + 1):
                    fact *= k
                    if self.small_x:
                        g = mpmath.gamma(1 + k / a)
                        s = mpmath.sinpi(k * (e + a) / (2 * a))
                    else:
                        g = mpmath.gamma(a * k + 1)
                        s = mpmath.sinpi(k * (a + e) / 2)
                    c = g / fact * s / mpmath.pi
                    out.append(c if k % 2 else -c)
            self._mp[dps] = cached = out
        return cached[:n]


@lru_cache(maxsize=256)
def _coefficients(small_x: bool, alpha: float, eta: float) -> _Coefficients:
    return _Coefficients(small_x, alpha, eta)


def _log_envelope(coef: _Coefficients, n: int, lnx: float):
    logc, sign = coef.tables(n)
    return logc + coef.exponents(n) * lnx, sign


def _terms_until(coef: _Coefficients, lnx: float, floor: Callable[[float], float], cap: int):
    """Return log-envelope and sign arrays long enough to pass the peak and drop below floor."""
    n = 64
    while True:
        n_eff = min(n, cap)
        env, sign = _log_envelope(coef, n_eff, lnx)
        kpk = int(np.argmax(env))
        below = np.nonzero(env[kpk:] < floor(env[kpk]))[0]
        if below.size:
            m = kpk + int(below[0]) + 1
            return env[:m], sign[:m]
        if n_eff >= cap:
            raise NonConvergenceError(
                f"series needs more than {cap} terms (alpha={coef.alpha}, eta={coef.eta}, "
                f"x={math.exp(lnx):.6g})"
            )
        n *= 4


def _mp_sum(coef: _Coefficients, x: float, n: int, dps: int) -> mpmath.mpf:
    c = coef.mp_coeffs(n, dps)
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        if coef.small_x:
            z, pre = xm, mpmath.mpf(1)
        else:
            z = xm ** (-mpmath.mpf(coef.alpha))
            pre = z / xm
        acc = mpmath.mpf(0)
        for ck in reversed(c):
            acc = acc * z + ck
        return acc * pre


def _sum_convergent(coef: _Coefficients, x: float, cap: int, tol: float, ln_hint: float = 0.0) -> float:
    """Sum a convergent series at ``x > 0``; ``ln_hint`` is a rough log-size of the result."""
    lnx = math.log(x)
    ln_tol = math.log(tol)
    env, sign = _terms_until(
        coef, lnx, lambda top: min(top - 40.0 * math.log(10.0), ln_tol + ln_hint - 5.0), cap
    )
    lmax = float(env.max())
    if lmax < 700.0:
        terms = sign * np.exp(env)
        s = math.fsum(terms)
        err = math.exp(lmax) * 4.0 * _EPS * math.sqrt(env.size)
        if err <= tol * abs(s) and env[-1] <= ln_tol + math.log(abs(s)) - math.log(100.0):
            return s
        guess = max(abs(s), err)
    else:
        guess = math.exp(-745.0)

    # cancellation: escalate precision until the rounding error is covered
    dps = 24 + int(math.ceil((lmax - math.log(max(guess, 1e-300))) / math.log(10.0)))
    for _ in range(16):
        dps = 16 * ((dps + 15) // 16)
        n = env.size
        with mpmath.workdps(dps):
            s = _mp_sum(coef, x, n, dps)
            mag = abs(s)
            ln_s = float(mpmath.log(mag)) if mag > 0 else -math.inf
        if ln_s == -math.inf:
            dps += 32
            continue
        ln_err = lmax - dps * math.log(10.0) + math.log(n) + 2.0
        if ln_err > ln_tol + ln_s - math.log(100.0):
            dps = 24 + int(math.ceil((lmax - ln_s) / math.log(10.0) + math.log10(n)))
            continue
        if float(env[-1]) <= ln_tol + ln_s - math.log(100.0):
            return float(s)
        target = ln_tol + ln_s - math.log(1e4)
        env, sign = _terms_until(coef, lnx, lambda top, t=target: t, cap)
        lmax = float(env.max())
    raise NonConvergenceError(f"precision escalation failed at x={x}, alpha={coef.alpha}")


def _sum_asymptotic(coef: _Coefficients, x: float, tol: float) -> float | None:
    """Sum an asymptotic expansion up to its smallest term, or None if too inaccurate."""
    lnx = math.log(x)
    n = 64
    while True:
        env, sign = _log_envelope(coef, n, lnx)
        live = np.abs(sign) > 1e-12
        if not live.any():
            return 0.0
        inc = np.diff(env)
        # first index where the envelope turns upward after having decreased
        turn = np.nonzero(inc > 0)[0]
        if turn.size and turn[0] > 0 or n >= 4096:
            break
        if turn.size and turn[0] == 0:
            return None
        n *= 4
    stop = int(turn[0]) + 1 if turn.size else n
    terms = sign[:stop] * np.exp(env[:stop])
    s = math.fsum(terms)
    err = math.exp(float(env[stop - 1]))
    if s == 0.0 or err > tol * abs(s):
        return None
    return s


def _peak_index(small_x: bool, alpha: float, x: float) -> float:
    """Stirling estimate of the index of the largest term."""
    if small_x:
        return (x * alpha ** (-1.0 / alpha)) ** (alpha / (alpha - 1.0))
    return (alpha / x) ** (alpha / (1.0 - alpha))


def light_tail_log_bound(x: float, alpha: float) -> float:
    """Chernoff bound on the log tail mass of a totally skewed law beyond ``x``.

    For ``alpha > 1`` this is the right tail of the spectrally negative law
    (``eta = 2 - alpha``); for ``alpha < 1`` the mass of the subordinator
    (``eta = alpha``) below ``x``.  Unit scale.
    """
    if alpha > 1:
        return -(alpha - 1.0) * alpha ** (-alpha / (alpha - 1.0)) * x ** (alpha / (alpha - 1.0))
    return -(1.0 - alpha) * alpha ** (alpha / (1.0 - alpha)) * x ** (-alpha / (1.0 - alpha))


def _positive_side(x: float, alpha: float, eta: float, cap: int, tol: float) -> float:
    """Density at ``x > 0`` with unit scale."""
    if alpha < 1 and abs(eta + alpha) <= _SKEW_TOL:
        return 0.0
    conv_small = alpha > 1
    light = abs(eta - (2.0 - alpha if alpha > 1 else alpha)) <= _SKEW_TOL
    peak = _peak_index(conv_small, alpha, x)
    if peak > _PEAK_SWITCH:
        if light:
            if light_tail_log_bound(x, alpha) < _LOG_NEGLIGIBLE:
                return 0.0
        else:
            s = _sum_asymptotic(_coefficients(not conv_small, alpha, eta), x, tol)
            if s is not None:
                return s
    if light:
        hint = light_tail_log_bound(x, alpha)
    else:
        hint = -(1.0 + alpha) * max(math.log(x), 0.0)
    return _sum_convergent(_coefficients(conv_small, alpha, eta), x, cap, tol, hint)


def density_at_zero(alpha: float, eta: float) -> float:
    """Value at the origin: Gamma(1 + 1/alpha) cos(pi eta / (2 alpha)) / pi."""
    if alpha < 1 and abs(abs(eta) - alpha) <= _SKEW_TOL:
        return 0.0
    return math.gamma(1.0 + 1.0 / alpha) * math.cos(math.pi * eta / (2.0 * alpha)) / math.pi


def density_series(
    x: float,
    alpha: float,
    eta: float,
    *,
    series_cap: int = DEFAULT_SERIES_CAP,
    tol: float = DEFAULT_TOL,
) -> float:
    """Unit-scale stable density ``p_alpha(x; eta, 1)`` by series summation.

    Negative ``x`` uses the reflection ``p(-x; eta) = p(x; -eta)``.

    Raises:
        DomainError: invalid ``(alpha, eta)`` or non-finite ``x``.
        NonConvergenceError: ``series_cap`` terms do not reach ``tol``.
    """
    if series_cap < 1 or not tol > 0:
        raise ValueError("series_cap >= 1 and tol > 0 required")
    try:
        StableParams.eta(alpha, eta)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    if x == 0.0:
        return density_at_zero(alpha, eta)
    if x < 0:
        x, eta = -x, -eta
    value = _positive_side(x, alpha, eta, series_cap, tol)
    if value < 0:
        log.debug("negative round-off %.3g clamped to 0 (x=%g, alpha=%g, eta=%g)", value, x, alpha, eta)
        value = 0.0
    return value


def density_dual(
    u: float,
    alpha: float,
    eta: float,
    *,
    series_cap: int = DEFAULT_SERIES_CAP,
    tol: float = DEFAULT_TOL,
) -> float:
    """``p_alpha(u; eta, 1)`` via the dual law: ``u^-(1+alpha) p_{1/alpha}(u^-alpha; eta*, 1)``."""
    if not u > 0:
        raise DomainError(f"duality map needs u > 0, got {u}")
    try:
        a_star, e_star = dual_params(alpha, eta)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    # keep the dual asymmetry inside its range when eta sits on the boundary
    e_star = max(-a_star, min(a_star, e_star))
    y = u ** (-alpha)
    return u ** (-(1.0 + alpha)) * density_series(y, a_star, e_star, series_cap=series_cap, tol=tol)


def density_quadrature(x: float, params: StableParams, *, epsabs: float = 1e-11, limit: int = 2000) -> float:
    """Density by direct numerical Fourier inversion of the ``eta``-form transform.

    The integrand ``exp(-b l^a cos(pi eta/2)) cos(b l^a sin(pi eta/2) - l x)``
    is integrated over ``[0, L]`` where the damping envelope falls to 1e-16,
    with the ``cos(l x)``/``sin(l x)`` factors handled by oscillatory rules.
    """
    alpha, eta, b = params.eta_form()
    damp = b * math.cos(math.pi * eta / 2.0)
    if not damp > 0:
        raise DomainError("inversion integral is not absolutely convergent for these parameters")
    lam_max = (math.log(1e16) / damp) ** (1.0 / alpha)
    twist = b * math.sin(math.pi * eta / 2.0)

    def env(lam):
        return math.exp(-damp * lam**alpha)

    def f_cos(lam):
        return env(lam) * math.cos(twist * lam**alpha)

    def f_sin(lam):
        return env(lam) * math.sin(twist * lam**alpha)

    total = 0.0
    for f, weight in ((f_cos, "cos"), (f_sin, "sin")):
        if x == 0.0:
            if weight == "sin":
                continue
            val, err, info = _quad(f, lam_max, None, epsabs, limit)
        else:
            val, err, info = _quad(f, lam_max, (weight, x), epsabs, limit)
        total += val
    return max(total / math.pi, 0.0)


def _quad(f, upper, weight, epsabs, limit):
    # split the range so each piece sees a bounded number of oscillations
    edges = np.linspace(0.0, upper, 9)
    val = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        kw = dict(epsabs=epsabs / 8, epsrel=1e-12, limit=limit, full_output=1)
        if weight is not None:
            kw.update(weight=weight[0], wvar=weight[1])
        out = integrate.quad(f, lo, hi, **kw)
        v, e = out[0], out[1]
        if len(out) > 3 and e > 1e-9:
            raise QuadratureError(f"inversion quadrature failed on [{lo:g}, {hi:g}]: {out[3]}")
        val += v
        err += e
    return val, err, None


def rescale(unit_density: Callable[[float], float], x: float, b: float, alpha: float) -> tuple[float, float]:
    """Evaluate a density with scale ``b`` from its unit-scale version.

    Returns ``(x_unit, value)`` with ``x_unit = b^(-1/alpha) x`` and
    ``value = b^(-1/alpha) unit_density(x_unit)``.
    """
    if not b > 0:
        raise ValueError(f"scale must be positive, got {b}")
    f = b ** (-1.0 / alpha)
    xs = f * x
    return xs, f * unit_density(xs)


def process_scale(b: float, t: float, alpha: float) -> float:
    """Scale of the spectrally negative motion ``Y(t)``: ``b^(-alpha) t``."""
    return b ** (-alpha) * t


@dataclass(frozen=True)
class DensityQuery:
    """Point evaluation request for a stable density."""

    x: float
    params: StableParams
    method: Method = Method.SERIES
    series_cap: int = DEFAULT_SERIES_CAP
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.series_cap < 1 or not self.tol > 0:
            raise ValueError("series_cap >= 1 and tol > 0 required")
        if self.method is Method.DUAL:
            alpha = self.params.alpha
            if not 1.0 < alpha <= 2.0 or not self.x > 0:
                raise DomainError("DUAL needs 1 < alpha <= 2 and x > 0")

    def evaluate(self) -> float:
        return density(self.x, self.params, self.method, series_cap=self.series_cap, tol=self.tol)


def density(
    x: float,
    params: StableParams,
    method: Method | str = Method.SERIES,
    *,
    series_cap: int = DEFAULT_SERIES_CAP,
    tol: float = DEFAULT_TOL,
) -> float:
    """Density of ``params`` (any parametrization, any scale) at ``x``."""
    method = Method(method)
    if method is Method.QUADRATURE:
        return density_quadrature(x, params)
    alpha, eta, b = params.eta_form()
    if method is Method.DUAL:
        unit = lambda u: density_dual(u, alpha, eta, series_cap=series_cap, tol=tol)  # noqa: E731
    else:
        unit = lambda u: density_series(u, alpha, eta, series_cap=series_cap, tol=tol)  # noqa: E731
    return rescale(unit, x, b, alpha)[1]


def density_grid(xs, params: StableParams, method: Method | str = Method.SERIES, **kw) -> np.ndarray:
    return np.array([density(float(x), params, method, **kw) for x in np.asarray(xs, dtype=float)])


__all__ = [
    "DensityQuery",
    "Method",
    "Param",
    "density",
    "density_at_zero",
    "density_dual",
    "density_grid",
    "density_quadrature",
    "density_series",
    "light_tail_log_bound",
    "process_scale",
    "rescale",
]
