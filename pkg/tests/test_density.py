import math

import numpy as np
import pytest
from scipy import integrate

from fracdual.density import (
    DensityQuery,
    Method,
    density,
    density_at_zero,
    density_dual,
    density_quadrature,
    density_series,
    light_tail_log_bound,
    process_scale,
    rescale,
)
from fracdual.errors import DomainError, NonConvergenceError
from fracdual.params import Param, StableParams


def levy_half(x):
    # Laplace transform exp(-sqrt(s))
    return x**-1.5 * math.exp(-1.0 / (4.0 * x)) / (2.0 * math.sqrt(math.pi))


def gauss2(x):
    # characteristic exponent -|lam|^2, variance 2
    return math.exp(-x * x / 4.0) / (2.0 * math.sqrt(math.pi))


def test_closed_forms():
    assert density_series(1.0, 0.5, 0.5) == pytest.approx(levy_half(1.0), rel=1e-13)
    assert density_series(1.0, 0.5, 0.5) == pytest.approx(0.219696, abs=1e-6)
    assert density_series(0.5, 0.5, 0.5) == pytest.approx(0.483941, abs=1e-6)
    assert density_series(1.0, 2.0, 0.0) == pytest.approx(gauss2(1.0), rel=1e-13)


@pytest.mark.parametrize("x", [0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0])
def test_levy_over_range(x):
    assert density_series(x, 0.5, 0.5) == pytest.approx(levy_half(x), rel=1e-11)


@pytest.mark.parametrize("x", [-7.0, -2.5, -0.3, 0.0, 0.4, 1.7, 5.0, 9.0])
def test_gaussian_over_range(x):
    assert density_series(x, 2.0, 0.0) == pytest.approx(gauss2(x), rel=1e-10, abs=1e-300)


def test_subordinator_vanishes_on_negative_axis():
    assert density_series(0.0, 0.5, 0.5) == 0.0
    assert density_series(-1.0, 0.7, 0.7) == 0.0


def test_scale():
    p = StableParams.subordinator(0.5, 2.0)
    assert density(2.0, p) == pytest.approx(0.25 * levy_half(0.5), rel=1e-12)
    assert density(2.0, p) == pytest.approx(0.120985, abs=1e-6)
    xs, v = rescale(lambda u: levy_half(u), 2.0, 1.0, 0.5)
    assert xs == 2.0 and v == pytest.approx(levy_half(2.0))
    assert process_scale(2.0, 3.0, 1.5) == pytest.approx(3.0 * 2.0**-1.5)
    # Gaussian: variance scales as b^(2/alpha)
    g = StableParams.eta(2.0, 0.0, 4.0)
    assert density(1.0, g) == pytest.approx(math.exp(-1 / 16) / math.sqrt(16 * math.pi), rel=1e-12)


@pytest.mark.parametrize("alpha,eta", [(1.5, 0.5), (1.3, -0.2), (0.7, 0.3), (1.9, 0.1)])
def test_value_at_zero_is_limit(alpha, eta):
    assert density_series(0.0, alpha, eta) == pytest.approx(density_series(1e-9, alpha, eta), abs=1e-8)
    assert density_at_zero(alpha, eta) == pytest.approx(
        math.gamma(1 + 1 / alpha) * math.cos(math.pi * eta / (2 * alpha)) / math.pi
    )


@pytest.mark.parametrize("alpha,eta", [(1.5, 0.3), (0.6, -0.4), (1.8, -0.2)])
def test_reflection(alpha, eta):
    for x in (0.3, 1.2, 4.0):
        assert density_series(-x, alpha, eta) == pytest.approx(density_series(x, alpha, -eta), rel=1e-14)


CASES = [(0.4, 0.0), (0.5, 0.2), (0.8, 0.8), (0.9, -0.5), (1.1, 0.9), (1.2, 0.0), (1.5, 0.5), (1.5, -0.5), (1.9, 0.05)]


@pytest.mark.parametrize("alpha,eta", CASES)
def test_series_matches_fourier_inversion(alpha, eta):
    p = StableParams.eta(alpha, eta)
    for x in np.linspace(-5, 5, 11):
        assert density_series(float(x), alpha, eta) == pytest.approx(density_quadrature(float(x), p), abs=5e-11)


@pytest.mark.parametrize("alpha,eta", [(0.7, 0.3), (1.3, 0.1)])
def test_normalization(alpha, eta):
    f = lambda x: density_series(x, alpha, eta)  # noqa: E731
    total = sum(integrate.quad(f, lo, hi, limit=400, epsabs=1e-12)[0] for lo, hi in [(-np.inf, -1), (-1, 0), (0, 1), (1, np.inf)])
    assert total == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("alpha,eta", [(1.5, 0.2), (0.6, 0.1), (1.2, -0.6)])
def test_heavy_tail_asymptote(alpha, eta):
    x = 1e4
    two_terms = sum(
        (-1) ** (k + 1) * math.gamma(alpha * k + 1) / math.factorial(k)
        * math.sin(math.pi * k * (alpha + eta) / 2) * x ** (-alpha * k - 1)
        for k in (1, 2)
    ) / math.pi
    assert density_series(x, alpha, eta) == pytest.approx(two_terms, rel=1e-4)


def test_light_tail_decays_like_chernoff_bound():
    alpha = 1.5
    for x in (2.0, 4.0, 6.0):
        assert math.log(density_series(x, alpha, 2 - alpha)) < light_tail_log_bound(x, alpha) + 5
    # far beyond the bound the density is reported as zero
    assert density_series(60.0, 1.2, 0.8) == 0.0


@pytest.mark.parametrize("alpha", [1.3, 1.5, 1.8])
@pytest.mark.parametrize("u", [0.25, 0.5, 1.0, 2.0, 4.0])
def test_duality_matches_direct_series(alpha, u):
    direct = density_series(u, alpha, 2 - alpha)
    dual = density_dual(u, alpha, 2 - alpha)
    assert abs(direct - dual) <= 1e-9 * direct


def test_duality_gaussian_levy():
    # u^-3 g_(1/2)(u^-2) equals the Gaussian value at u = 1
    assert density_dual(1.0, 2.0, 0.0) == pytest.approx(gauss2(1.0), rel=1e-13)
    assert levy_half(1.0) == pytest.approx(gauss2(1.0), rel=1e-15)


def test_duality_general_asymmetry():
    for alpha, eta in [(1.5, 0.1), (1.7, -0.3)]:
        for u in (0.5, 1.5):
            assert density_dual(u, alpha, eta) == pytest.approx(density_series(u, alpha, eta), rel=1e-10)


def test_boundary_asymmetry_rounding():
    # 0.9 is a few ulps above 2 - 1.1; the edge must be treated as exact
    assert density_series(3.0, 1.1, 0.9) >= 0.0
    assert density_series(3.0, 1.1, 0.9) == pytest.approx(density_dual(3.0, 1.1, 0.9), abs=1e-15)


def test_errors():
    with pytest.raises(DomainError):
        density_series(1.0, 1.5, 0.8)
    with pytest.raises(DomainError):
        density_series(float("nan"), 1.5, 0.0)
    with pytest.raises(DomainError):
        density_dual(0.0, 1.5, 0.5)
    with pytest.raises(DomainError):
        density_dual(1.0, 0.5, 0.5)
    with pytest.raises(NonConvergenceError):
        density_series(3.0, 1.5, 0.0, series_cap=5)
    with pytest.raises(ValueError):
        density_series(1.0, 1.5, 0.0, series_cap=0)


def test_query_and_methods():
    p = StableParams(Param.ST_BETA, 1.5, -1.0, 1.0)
    vals = [DensityQuery(0.7, p, m).evaluate() for m in Method]
    assert vals[1] == pytest.approx(vals[0], abs=1e-10)
    assert vals[2] == pytest.approx(vals[0], rel=1e-10)
    with pytest.raises(DomainError):
        DensityQuery(-1.0, p, Method.DUAL)


def test_parametrizations_give_same_density():
    p = StableParams.eta(1.4, 0.3, 2.0)
    ref = density(0.8, p)
    for tag in Param:
        assert density(0.8, p.to(tag)) == pytest.approx(ref, rel=1e-11)
