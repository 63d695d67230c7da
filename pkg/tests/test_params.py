import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracdual.params import (
    InvalidParameters,
    Param,
    StableParams,
    char_exponent,
    convert,
    dual_params,
    validate,
)


def test_validate_reports_violated_constraint():
    v = validate("eta", 1.5, 0.9)
    assert not v.ok and "2 - alpha" in v.constraint
    assert validate("eta", 0.5, 0.5).ok
    assert not validate("eta", 1.0, 0.0).ok
    assert not validate("q", 1.5, 0.5, -1.0).ok
    assert not validate("q", 0.5, 0.5, 1.0).ok
    assert not validate("beta", 1.5, 1.2).ok
    assert not validate("theta", 1.5, 0.0, 0.0).ok
    assert not validate("nope", 1.5, 0.0).ok
    assert not validate("eta", float("nan"), 0.0).ok


def test_invalid_parameters_carry_constraint():
    with pytest.raises(InvalidParameters) as exc:
        StableParams.eta(1.5, 0.9)
    assert "eta" in exc.value.constraint


def test_boundary_slack_accepts_rounded_edges():
    a = 1.1
    StableParams.eta(a, 2.0 - a + 1e-15)


def test_special_cases():
    sub = StableParams.subordinator(0.6, 2.0)
    assert sub.eta_form() == (0.6, 0.6, 2.0)
    # totally skewed to the right: beta = +1 for the subordinator
    assert sub.to("beta").asym == pytest.approx(1.0)
    neg = StableParams.spectrally_negative(1.5)
    assert neg.to("beta").asym == pytest.approx(-1.0)
    assert neg.to("q").asym == pytest.approx(1.0)


def test_eta_conversion_formulas():
    a, eta, b = 1.5, 0.3, 2.0
    p = StableParams.eta(a, eta, b)
    th = p.to(Param.LUKACS_THETA)
    assert th.scale == pytest.approx(b * math.cos(math.pi * eta / 2), rel=1e-14)
    assert th.asym == pytest.approx(-math.tan(math.pi * eta / 2) / math.tan(math.pi * a / 2), rel=1e-14)
    st_ = p.to(Param.ST_BETA)
    assert st_.asym == pytest.approx(-th.asym)
    assert st_.scale**a == pytest.approx(th.scale, rel=1e-14)
    fq = p.to(Param.FELLER_Q)
    assert fq.asym == pytest.approx((1 - st_.asym) / 2)
    assert -fq.scale * math.cos(math.pi * a / 2) == pytest.approx(th.scale, rel=1e-14)


@pytest.mark.parametrize("tag", list(Param))
@pytest.mark.parametrize("alpha,eta", [(0.5, 0.2), (0.8, -0.8), (1.5, 0.4), (1.9, -0.1), (1.3, 0.7)])
def test_characteristic_exponent_is_invariant(tag, alpha, eta):
    p = StableParams.eta(alpha, eta, 1.7)
    lam = np.array([-3.0, -0.4, 0.25, 1.0, 2.5])
    ref = char_exponent(p, lam)
    assert np.allclose(char_exponent(p.to(tag), lam), ref, rtol=1e-12, atol=0)


def _asym(alpha):
    bound = alpha if alpha < 1 else 2.0 - alpha
    return st.floats(-bound, bound)


@st.composite
def eta_params(draw):
    alpha = draw(st.one_of(st.floats(0.05, 0.95), st.floats(1.05, 1.95)))
    eta = draw(_asym(alpha))
    b = draw(st.floats(1e-3, 1e3))
    return StableParams.eta(alpha, eta, b)


@settings(max_examples=200, deadline=None)
@given(eta_params(), st.sampled_from(list(Param)))
def test_round_trip(p, tag):
    # away from alpha = 1, tan(pi alpha / 2) is well conditioned
    back = convert(convert(p, tag), Param.ZOLOTAREV_ETA)
    assert back.alpha == p.alpha
    assert back.scale == pytest.approx(p.scale, rel=1e-10)
    assert back.asym == pytest.approx(p.asym, rel=1e-10, abs=1e-10)


def test_gaussian_asymmetry_is_degenerate():
    p = StableParams(Param.ST_BETA, 2.0, 0.7, 1.0)
    e = p.to("eta")
    assert e.asym == 0.0 and e.scale == pytest.approx(1.0)


def test_dual_params():
    assert dual_params(1.5, 0.5) == pytest.approx((2 / 3, 2 / 3))
    assert dual_params(2.0, 0.0) == pytest.approx((0.5, 0.5))
    a, e = dual_params(1.5, -0.5)
    assert abs(e) <= a + 1e-12
    with pytest.raises(ValueError):
        dual_params(0.8, 0.1)
    with pytest.raises(ValueError):
        dual_params(1.5, 0.7)
