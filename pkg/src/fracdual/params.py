"""Stable-law parameters in four parametrizations.

All four describe a centred stable law through the Fourier transform
``p_hat(lam) = E exp(i lam X) = exp(psi(lam))``:

* ``LUKACS_THETA``  psi = -c |lam|^a [1 + i theta sgn(lam) tan(pi a/2)]
* ``ZOLOTAREV_ETA`` psi = -b |lam|^a exp(-i pi eta sgn(lam) / 2)
* ``ST_BETA``       psi = -sigma^a |lam|^a [1 - i beta sgn(lam) tan(pi a/2)]
* ``FELLER_Q``      psi = q A (i lam)^a + (1 - q) A (-i lam)^a

Conversions route through ``ZOLOTAREV_ETA``.  The index ``alpha = 1`` is not
representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

REL_TOL = 1e-12
ABS_FLOOR = 1e-300


class Param(str, Enum):
    LUKACS_THETA = "theta"
    ZOLOTAREV_ETA = "eta"
    ST_BETA = "beta"
    FELLER_Q = "q"


class Validation(NamedTuple):
    ok: bool
    constraint: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class InvalidParameters(ValueError):
    """Raised when constructing parameters that violate their admissible range."""

    def __init__(self, constraint: str):
        super().__init__(constraint)
        self.constraint = constraint


def _within(value: float, bound: float) -> bool:
    return abs(value) <= bound + REL_TOL * max(1.0, abs(bound))


def close(a: float, b: float, rel: float = REL_TOL) -> bool:
    """Relative comparison with an absolute floor, for scales spanning decades."""
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), ABS_FLOOR)


def validate(tag: Param | str, alpha: float, asym: float, scale: float = 1.0) -> Validation:
    """Check ``(alpha, asym, scale)`` against the range rules for ``tag``."""
    try:
        tag = Param(tag)
    except ValueError:
        return Validation(False, f"unknown parametrization {tag!r}")
    for name, v in (("alpha", alpha), ("asym", asym), ("scale", scale)):
        if not math.isfinite(v):
            return Validation(False, f"{name} must be finite, got {v!r}")
    if not 0.0 < alpha <= 2.0:
        return Validation(False, f"alpha must lie in (0, 2], got {alpha}")
    if alpha == 1.0:
        return Validation(False, "alpha = 1 is excluded")

    if tag is Param.LUKACS_THETA:
        if not _within(asym, 1.0):
            return Validation(False, f"|theta| <= 1 violated: theta = {asym}")
        if scale <= 0:
            return Validation(False, f"c > 0 violated: c = {scale}")
    elif tag is Param.ZOLOTAREV_ETA:
        bound = alpha if alpha < 1 else 2.0 - alpha
        rule = "|eta| <= alpha" if alpha < 1 else "|eta| <= 2 - alpha"
        if not _within(asym, bound):
            return Validation(False, f"{rule} = {bound:g} violated: eta = {asym}")
        if scale <= 0:
            return Validation(False, f"b > 0 violated: b = {scale}")
    elif tag is Param.ST_BETA:
        if not _within(asym, 1.0):
            return Validation(False, f"|beta| <= 1 violated: beta = {asym}")
        if scale <= 0:
            return Validation(False, f"sigma > 0 violated: sigma = {scale}")
    else:
        if not (-REL_TOL <= asym <= 1.0 + REL_TOL):
            return Validation(False, f"q in [0, 1] violated: q = {asym}")
        if alpha > 1 and scale <= 0:
            return Validation(False, f"a > 0 required for 1 < alpha <= 2: a = {scale}")
        if alpha < 1 and scale >= 0:
            return Validation(False, f"a < 0 required for 0 < alpha < 1: a = {scale}")
    return Validation(True)


@dataclass(frozen=True)
class StableParams:
    """Index, asymmetry and scale of a stable law under parametrization ``tag``."""

    tag: Param
    alpha: float
    asym: float
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tag", Param(self.tag))
        for name in ("alpha", "asym", "scale"):
            object.__setattr__(self, name, float(getattr(self, name)))
        report = validate(self.tag, self.alpha, self.asym, self.scale)
        if not report:
            raise InvalidParameters(report.constraint)

    @classmethod
    def eta(cls, alpha: float, eta: float, b: float = 1.0) -> "StableParams":
        return cls(Param.ZOLOTAREV_ETA, alpha, eta, b)

    @classmethod
    def subordinator(cls, gamma: float, b: float = 1.0) -> "StableParams":
        """Totally positively skewed law with Laplace transform exp(-b s^gamma)."""
        return cls(Param.ZOLOTAREV_ETA, gamma, gamma, b)

    @classmethod
    def spectrally_negative(cls, alpha: float, b: float = 1.0) -> "StableParams":
        """Law with no positive jumps, Fourier transform exp(b (i lam)^alpha)."""
        return cls(Param.ZOLOTAREV_ETA, alpha, 2.0 - alpha, b)

    def to(self, target: Param | str) -> "StableParams":
        return convert(self, target)

    def eta_form(self) -> tuple[float, float, float]:
        """Return ``(alpha, eta, b)``."""
        p = convert(self, Param.ZOLOTAREV_ETA)
        return p.alpha, p.asym, p.scale

    def isclose(self, other: "StableParams", rel: float = REL_TOL) -> bool:
        return (
            self.tag is other.tag
            and close(self.alpha, other.alpha, rel)
            and (close(self.asym, other.asym, rel) or abs(self.asym - other.asym) <= rel)
            and close(self.scale, other.scale, rel)
        )


def _clamp(value: float, bound: float) -> float:
    # round-off can push a boundary value a few ulps outside its range
    return max(-bound, min(bound, value))


def _to_eta(p: StableParams) -> tuple[float, float]:
    a, x, s = p.alpha, p.asym, p.scale
    if p.tag is Param.ZOLOTAREV_ETA:
        return x, s
    if p.tag is Param.FELLER_Q:
        beta, sigma_a = 1.0 - 2.0 * x, -s * math.cos(math.pi * a / 2)
        theta, c = -beta, sigma_a
    elif p.tag is Param.ST_BETA:
        theta, c = -x, s**a
    else:
        theta, c = x, s
    if a == 2.0:
        return 0.0, c
    eta = 2.0 / math.pi * math.atan(-theta * math.tan(math.pi * a / 2))
    eta = _clamp(eta, a if a < 1 else 2.0 - a)
    return eta, c / math.cos(math.pi * eta / 2)


def _from_eta(alpha: float, eta: float, b: float, target: Param) -> tuple[float, float]:
    if target is Param.ZOLOTAREV_ETA:
        return eta, b
    c = b * math.cos(math.pi * eta / 2)
    if alpha == 2.0:
        theta = 0.0
    else:
        theta = _clamp(-math.tan(math.pi * eta / 2) / math.tan(math.pi * alpha / 2), 1.0)
    if target is Param.LUKACS_THETA:
        return theta, c
    beta, sigma = -theta, c ** (1.0 / alpha)
    if target is Param.ST_BETA:
        return beta, sigma
    q = min(1.0, max(0.0, (1.0 - beta) / 2.0))
    return q, -c / math.cos(math.pi * alpha / 2)


def convert(p: StableParams, target: Param | str) -> StableParams:
    """Express the same distribution in another parametrization."""
    target = Param(target)
    if target is p.tag:
        return p
    eta, b = _to_eta(p)
    asym, scale = _from_eta(p.alpha, eta, b, target)
    return StableParams(target, p.alpha, asym, scale)


def dual_params(alpha: float, eta: float) -> tuple[float, float]:
    """Index and asymmetry of the dual law with index ``1/alpha``.

    Maps the density with index ``1 < alpha <= 2`` onto one with index in
    ``[1/2, 1)``; ``eta = 2 - alpha`` maps to the totally skewed ``eta* = alpha*``.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"dual_params needs 1 < alpha <= 2, got {alpha}")
    if not _within(eta, 2.0 - alpha):
        raise ValueError(f"|eta| <= 2 - alpha violated: eta = {eta}")
    return 1.0 / alpha, (eta - 1.0) / alpha + 1.0


def char_exponent(p: StableParams, lam) -> np.ndarray:
    """Log characteristic function ``psi(lam)`` written in ``p``'s own formula."""
    lam = np.asarray(lam, dtype=float)
    a, x, s = p.alpha, p.asym, p.scale
    mag = np.abs(lam) ** a
    sgn = np.sign(lam)
    if p.tag is Param.LUKACS_THETA:
        return -s * mag * (1 + 1j * x * sgn * math.tan(math.pi * a / 2))
    if p.tag is Param.ZOLOTAREV_ETA:
        return -s * mag * np.exp(-1j * math.pi * x * sgn / 2)
    if p.tag is Param.ST_BETA:
        return -(s**a) * mag * (1 - 1j * x * sgn * math.tan(math.pi * a / 2))
    il = (1j * lam.astype(complex)) ** a
    mil = (-1j * lam.astype(complex)) ** a
    return x * s * il + (1 - x) * s * mil
