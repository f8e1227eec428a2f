"""Shared outage machinery: query and result types, the adaptive-quadrature
reference integrator and the diversity-order fit.

Every outage probability in both scenarios has the form

    int_lo^hi  h(x) f_far(x) dx,

where x is the gain of the far user and h is a probability mass of the near
user's gain between two thresholds that depend on x. ``far_integral``
evaluates such integrals to high accuracy and is the "exact" reference.
"""
from __future__ import annotations

import enum
import math
import warnings as _warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .channel import (
    DerivedCoefficients,
    Dynamic,
    GainCoefficients,
    GeometryConfig,
    OpenLoop,
    RadioConfig,
    Scenario,
    User,
    cdf_gain,
    derive_coefficients,
    pdf_gain,
    sf_gain,
)


class Method(str, enum.Enum):
    EXACT = "exact"
    CLOSED = "closed"
    ASYM = "asym"


class BranchDomainError(ValueError):
    """Inputs fall outside the validity region of the requested expression."""


@dataclass(frozen=True)
class OutageQuery:
    geo: GeometryConfig
    radio: RadioConfig
    protocol: OpenLoop | Dynamic
    user: User
    method: Method = Method.EXACT
    scenario: Scenario = Scenario.I

    def __post_init__(self):
        object.__setattr__(self, "user", User(self.user))
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "scenario", Scenario(self.scenario))

    @cached_property
    def coeffs(self) -> DerivedCoefficients:
        tau = self.protocol.tau if isinstance(self.protocol, OpenLoop) else None
        return derive_coefficients(self.geo, self.radio, tau)

    @property
    def near(self) -> GainCoefficients:
        return self.coeffs.gb if self.scenario is Scenario.I else self.coeffs.gf

    @property
    def far(self) -> GainCoefficients:
        return self.coeffs.gf if self.scenario is Scenario.I else self.coeffs.gb


def OutageQueryS1(geo, radio, protocol, user, method=Method.EXACT) -> OutageQuery:
    return OutageQuery(geo, radio, protocol, user, method, Scenario.I)


def OutageQueryS2(geo, radio, protocol, user, method=Method.EXACT) -> OutageQuery:
    return OutageQuery(geo, radio, protocol, user, method, Scenario.II)


@dataclass(frozen=True)
class OutageEstimate:
    value: float
    method: Method
    branch: str
    diagnostics: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# near-user probability masses


def near_mass(c: GainCoefficients, lo: float, hi: float) -> float:
    """Pr{lo < g_near < hi}, zero when hi <= lo."""
    if hi <= lo:
        return 0.0
    if cdf_gain("near", c, lo) > 0.5:
        return sf_gain("near", c, lo) - sf_gain("near", c, hi)
    return cdf_gain("near", c, hi) - cdf_gain("near", c, lo)


# ---------------------------------------------------------------------------
# reference integrator

EXACT_EPSREL = 1e-10
EXACT_EPSABS = 1e-16


def _breakpoints(far: GainCoefficients, lo: float, hi: float, extra=()) -> list[float]:
    pts = set()
    base = np.geomspace(1e-3 / far.b22, 1e3 / far.b21, 25)
    for p in list(base) + [float(e) for e in extra if e is not None and math.isfinite(e)]:
        if lo < p < hi:
            pts.add(float(p))
    return sorted(pts)


def far_integral(h, far: GainCoefficients, lo: float = 0.0, hi: float = math.inf, breaks=()) -> tuple[float, float]:
    """int_lo^hi h(x) f_far(x) dx by adaptive Gauss-Kronrod on a log grid.

    Returns (value, error estimate).
    """
    if not hi > lo:
        return 0.0, 0.0

    def integrand(x):
        if x <= 0.0:
            return 0.0
        v = h(x)
        return v * pdf_gain("far", far, x) if v else 0.0

    pts = [lo] + _breakpoints(far, lo, hi, breaks)
    finite_hi = math.isfinite(hi)
    if finite_hi:
        pts.append(hi)
    total = 0.0
    err = 0.0
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(pts[:-1], pts[1:]):
            v, e = integrate.quad(integrand, a, b, epsrel=EXACT_EPSREL, epsabs=EXACT_EPSABS, limit=200)
            total += v
            err += e
        if not finite_hi:
            a = pts[-1]
            # x = a + a u / (1 - u) maps the power-law tail onto [0, 1)
            def tail(u):
                x = a + a * u / (1.0 - u)
                return integrand(x) * a / (1.0 - u) ** 2

            v, e = integrate.quad(tail, 0.0, 1.0, epsrel=EXACT_EPSREL, epsabs=EXACT_EPSABS, limit=200)
            total += v
            err += e
    return total, err


# ---------------------------------------------------------------------------
# diversity order


def diversity_order(curve) -> float:
    """Least-squares slope of -log10(OP) against log10(rho).

    ``curve`` is a sequence of (rho linear, OP); the fit uses the points
    within the last decade of rho.
    """
    pts = np.asarray(list(curve), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError("curve must be a sequence of (rho, OP) pairs")
    if np.any(pts[:, 1] <= 0) or np.any(pts[:, 0] <= 0):
        raise ValueError("diversity order needs strictly positive rho and OP")
    pts = pts[np.argsort(pts[:, 0])]
    lr = np.log10(pts[:, 0])
    sel = lr >= lr[-1] - 1.0 - 1e-9
    if sel.sum() < 2:
        sel[-2:] = True
    slope = np.polyfit(lr[sel], np.log10(pts[sel, 1]), 1)[0]
    return float(-slope)


def make_estimate(value, method, branch, warn=(), **diag) -> OutageEstimate:
    if not math.isfinite(value):
        raise ArithmeticError(f"non-finite outage value in branch {branch}")
    return OutageEstimate(float(value), Method(method), branch, diag, tuple(warn))
