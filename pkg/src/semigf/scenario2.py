"""Scenario II outage: GF user in the disc (decoded first), GB user in the ring.

x denotes the GB gain throughout; the near (GF) gain enters through its
CDF at the thresholds

    y1(x) = gF (rB x + 1) / rF     (GF SINR threshold)
    c x,  c = rB / rF              (dynamic admission boundary)
    tau                            (open-loop admission threshold)
"""
from __future__ import annotations

import math

from .channel import Dynamic, OpenLoop, User, cdf_gain, mean_gain, pdf_gain, sf_gain
from .outage import (
    BranchDomainError,
    Method,
    OutageEstimate,
    OutageQuery,
    far_integral,
    make_estimate,
    near_mass,
)
from .quad import cheb_panels, cheb_panels_reciprocal
from .special import helper_M, helper_U, incomplete_gamma_difference, lower_incomplete_gamma


def _thresholds(q: OutageQuery):
    k = q.coeffs
    rB, rF, gF = k.rho_GB, k.rho_GF, k.gamma_GF
    y1 = lambda x: gF * (rB * x + 1.0) / rF
    return y1, rB / rF


def _check_protocol(q: OutageQuery, kind):
    if not isinstance(q.protocol, kind):
        raise TypeError(f"expected {kind.__name__} protocol, got {q.protocol!r}")


def inv_sigma5(q: OutageQuery) -> float:
    """GB gain above which y1 exceeds tau; 0 when every x qualifies."""
    k = q.coeffs
    tau = q.protocol.tau
    return max(0.0, (k.rho_GF * tau - k.gamma_GF) / (k.gamma_GF * k.rho_GB))


def openloop_regime(q: OutageQuery) -> str:
    """a: rF < gF/tau, b: gF/tau <= rF < gF (1 + gB)/tau, c: rF >= gF (1 + gB)/tau."""
    k = q.coeffs
    tau = q.protocol.tau
    lo = k.gamma_GF / tau
    hi = k.gamma_GF * (1.0 + k.gamma_GB) / tau
    if k.rho_GF < lo:
        return "a"
    if k.rho_GF < hi:
        return "b"
    return "c"


def _gb_dynamic_branch(k) -> str:
    return "a" if k.gamma_GF > k.gamma_GB / (k.gamma_GB + 1.0) else "b"


# ---------------------------------------------------------------------------
# exact


def gf_dynamic_exact(q: OutageQuery):
    k = q.coeffs
    y1, c = _thresholds(q)
    if k.gamma_GF >= 1.0:
        hi, branch = math.inf, "gF>=1"
    else:
        hi, branch = k.sigma3, "gF<1"
    v, e = far_integral(lambda x: near_mass(q.near, c * x, y1(x)), q.far, 0.0, hi, breaks=[k.sigma4])
    return v, branch, e


def q_dynamic_exact(q: OutageQuery):
    k = q.coeffs
    y1, c = _thresholds(q)
    return far_integral(
        lambda x: sf_gain("near", q.near, max(y1(x), c * x)), q.far, 0.0, k.sigma4, breaks=[k.sigma3]
    )


def gf_openloop_exact(q: OutageQuery):
    y1, _ = _thresholds(q)
    tau = q.protocol.tau
    lo = inv_sigma5(q)
    return far_integral(lambda x: near_mass(q.near, tau, y1(x)), q.far, lo, math.inf)


def q3_exact(q: OutageQuery):
    k = q.coeffs
    y1, _ = _thresholds(q)
    tau = q.protocol.tau
    return far_integral(
        lambda x: sf_gain("near", q.near, max(y1(x), tau)), q.far, 0.0, k.sigma4, breaks=[inv_sigma5(q)]
    )


# ---------------------------------------------------------------------------
# closed forms


def _far_diff(far, x):
    return incomplete_gamma_difference(far.b3, far.b22 * x, far.b21 * x)


def _u_pair(a, far, b3):
    return helper_U(a, far.b22, b3) - helper_U(a, far.b21, b3)


def _sf_y1_quadrature(q: OutageQuery, lo: float, hi: float, S: int):
    # int_lo^hi sf_near(y1(x)) f_far(x) dx with Lambda_4 style weights
    k = q.coeffs
    gf, gb = k.gf, k.gb
    d, b3 = gf.delta, k.b3
    rB, rF, gF = k.rho_GB, k.rho_GF, k.gamma_GF

    def f(x):
        lam4 = k.C2 * x ** (-b3) * gF ** (-d) * rF**d * (rB * x + 1.0) ** (-d)
        return lam4 * lower_incomplete_gamma(d, gf.b21 * k.sigma2 * (rB * x + 1.0)) * _far_diff(gb, x)

    return cheb_panels(f, lo, hi, gb, S)


def _sf_cx_quadrature(q: OutageQuery, lo: float, hi: float, S: int):
    # int_lo^hi sf_near(c x) f_far(x) dx with Lambda_3 style weights
    k = q.coeffs
    gf, gb = k.gf, k.gb
    d, b3 = gf.delta, k.b3
    rB, rF = k.rho_GB, k.rho_GF

    def f(x):
        lam3 = k.C2 * x ** (1.0 - 2.0 * b3) * rF**d * rB ** (-d)
        return lam3 * lower_incomplete_gamma(d, gf.b21 * rB / rF * x) * _far_diff(gb, x)

    return cheb_panels(f, lo, hi, gb, S)


def cor16_gf_dynamic(q: OutageQuery, S: int = 100):
    """gF >= 1: approximated I5 minus exact I6; gF < 1: quadrature on [0, sigma3]."""
    k = q.coeffs
    gf, gb = k.gf, k.gb
    d, b3 = gf.delta, k.b3
    rB, rF = k.rho_GB, k.rho_GF
    if k.gamma_GF >= 1.0:
        c = rB / rF
        i6 = 1.0 - k.C2 * c ** (-d) * _u_pair(gf.b21 * c, gb, b3)
        e = rB * k.sigma2
        i5 = 1.0 - k.C2 * e ** (-d) * _u_pair(gf.b21 * e, gb, b3)
        return i5 - i6, "gF>=1", {"I5": i5, "I6": i6}
    s3 = k.sigma3
    v = _sf_cx_quadrature(q, 0.0, s3, S) - _sf_y1_quadrature(q, 0.0, s3, S)
    return v, "gF<1", {"order": S}


def thm6_q(q: OutageQuery, S: int = 100):
    k = q.coeffs
    if _gb_dynamic_branch(k) == "a":
        return _sf_y1_quadrature(q, 0.0, k.sigma4, S), "a"
    s3, s4 = k.sigma3, k.sigma4
    return _sf_y1_quadrature(q, 0.0, s3, S) + _sf_cx_quadrature(q, s3, s4, S), "b"


def cor17_gf_openloop(q: OutageQuery):
    """rF < gF/tau with the noise term dropped in y1."""
    k = q.coeffs
    gf, gb = k.gf, k.gb
    d, b3 = gf.delta, k.b3
    rB, rF, gF = k.rho_GB, k.rho_GF, k.gamma_GF
    e = rB * gF / rF
    tau = q.protocol.tau
    return sf_gain("near", gf, tau) - k.C2 * e ** (-d) * _u_pair(gf.b21 * e, gb, b3)


def cor18_gf_openloop(q: OutageQuery, S: int = 100):
    """rF >= gF/tau: int_{1/sigma5}^inf [sf(tau) - sf(y1)] f_far dx in u = 1/x."""
    k = q.coeffs
    gf, gb = k.gf, k.gb
    d, b3 = gf.delta, k.b3
    rB, rF, gF = k.rho_GB, k.rho_GF, k.gamma_GF
    tau = q.protocol.tau
    inv5 = inv_sigma5(q)
    if not inv5 > 0:
        raise BranchDomainError("quadrature form needs rho_GF * tau > gamma_GF (finite sigma5)")
    s5 = 1.0 / inv5
    pref = k.C2

    def g(u):
        lam5 = pref * u ** (b3 - 2.0)
        th1 = tau ** (-d) * lam5
        th2 = (rF * u) ** d * (rB * gF + gF * u) ** (-d) * lam5
        sf_tau = th1 * lower_incomplete_gamma(d, gf.b21 * tau)
        sf_y1 = th2 * lower_incomplete_gamma(d, gf.b21 * gF * (rB + u) / (rF * u))
        return (sf_tau - sf_y1) * incomplete_gamma_difference(b3, gb.b22 / u, gb.b21 / u)

    return cheb_panels_reciprocal(g, 0.0, s5, gb, S)


def cor19_q3(q: OutageQuery, S: int = 100):
    k = q.coeffs
    tau = q.protocol.tau
    regime = openloop_regime(q)
    s4 = k.sigma4
    sf_tau = sf_gain("near", k.gf, tau)
    if regime == "a":
        return _sf_y1_quadrature(q, 0.0, s4, S), regime
    if regime == "b":
        lo = inv_sigma5(q)
        return cdf_gain("far", k.gb, lo) * sf_tau + _sf_y1_quadrature(q, lo, s4, S), regime
    return cdf_gain("far", k.gb, s4) * sf_tau, regime


# ---------------------------------------------------------------------------
# asymptotics (rho_GF -> infinity)


def _mdiff(far, t, ap):
    b3 = far.b3
    return helper_M(t, ap, b3, far.b22) - helper_M(t, ap, b3, far.b21)


def i5_inf(q: OutageQuery) -> float:
    """int C3 y1 f_far dx over all GB gains."""
    k = q.coeffs
    return k.C3 * k.sigma2 * (k.rho_GB * mean_gain("far", k.gb) + 1.0)


def q4(q: OutageQuery, x: float) -> float:
    """int_0^x (1 - C3 y1) f_far dt."""
    k = q.coeffs
    gb, b3 = k.gb, k.b3
    Ff = cdf_gain("far", gb, x)
    return Ff * (1.0 - k.C3 * k.sigma2) - k.C4 * k.rho_GB * _mdiff(gb, x, 2.0 - b3)


def cor20_gf_dynamic_asym(q: OutageQuery, S: int = 100):
    k = q.coeffs
    gf, gb = k.gf, k.gb
    d, b3 = gf.delta, k.b3
    rB, rF = k.rho_GB, k.rho_GF
    if k.gamma_GF >= 1.0:
        # both terms linearised in the near-user CDF
        i6 = k.C3 * rB / rF * mean_gain("far", gb)
        return i5_inf(q) - i6, "gF>=1"
    c = rB / rF

    def f(x):
        return (k.C3 * k.sigma2 * (rB * x + 1.0) - cdf_gain("near", gf, c * x)) * pdf_gain("far", gb, x)

    return cheb_panels(f, 0.0, k.sigma3, gb, S), "gF<1"


def cor21_gb_dynamic_asym(q: OutageQuery, p_gf: float):
    k = q.coeffs
    gb, b3 = k.gb, k.b3
    if _gb_dynamic_branch(k) == "a":
        return q4(q, k.sigma4) + p_gf, "a"
    s3, s4 = k.sigma3, k.sigma4
    lin = k.C3 * gb.b12 * k.rho_GB / k.rho_GF * (_mdiff(gb, s4, 2.0 - b3) - _mdiff(gb, s3, 2.0 - b3))
    return p_gf + q4(q, s3) + cdf_gain("far", gb, s4) - cdf_gain("far", gb, s3) - lin, "b"


def cor22_gf_openloop_asym(q: OutageQuery, S: int = 100):
    k = q.coeffs
    gf, gb = k.gf, k.gb
    b3 = k.b3
    tau = q.protocol.tau
    F_tau = cdf_gain("near", gf, tau)
    inv5 = inv_sigma5(q)
    if not inv5 > 0:
        return i5_inf(q) - F_tau, "a"
    s5 = 1.0 / inv5

    def g(u):
        xi = gb.b12 * u ** (b3 - 2.0)
        return xi * (k.C3 * k.sigma2 * (k.rho_GB / u + 1.0) - F_tau) * incomplete_gamma_difference(
            b3, gb.b22 / u, gb.b21 / u
        )

    return cheb_panels_reciprocal(g, 0.0, s5, gb, S), "b"


def theta_sigma4(q: OutageQuery) -> float:
    """Linearised F_far(sigma4)."""
    k = q.coeffs
    gb = k.gb
    a = 2.0 / gb.delta
    return 2.0 * k.sigma4 * (gb.R2 ** (2 + a) - gb.R1 ** (2 + a)) / ((2.0 + a) * (gb.R2**2 - gb.R1**2) * gb.lam)


def cor23_gb_openloop_asym(q: OutageQuery, p_gf: float):
    k = q.coeffs
    regime = openloop_regime(q)
    s4 = k.sigma4
    sf_tau = sf_gain("near", k.gf, q.protocol.tau)
    if regime == "a":
        return q4(q, s4) + p_gf, regime
    if regime == "b":
        lo = inv_sigma5(q)
        return cdf_gain("far", k.gb, lo) * sf_tau + q4(q, s4) - q4(q, lo) + p_gf, regime
    return theta_sigma4(q) * sf_tau + p_gf, regime


# ---------------------------------------------------------------------------
# public operations


def _with_method(q: OutageQuery, method: Method) -> OutageQuery:
    return OutageQuery(q.geo, q.radio, q.protocol, q.user, method, q.scenario)


def op_gf_dynamic_s2(q: OutageQuery, S: int = 100) -> OutageEstimate:
    _check_protocol(q, Dynamic)
    if q.method is Method.EXACT:
        v, branch, err = gf_dynamic_exact(q)
        return make_estimate(v, q.method, branch, abs_error=err)
    if q.method is Method.CLOSED:
        v, branch, diag = cor16_gf_dynamic(q, S)
        warn = ()
        if branch == "gF>=1":
            warn = ("I5 uses the rho_GF -> infinity approximation",)
        return make_estimate(v, q.method, branch, warn, **diag)
    v, branch = cor20_gf_dynamic_asym(q, S)
    return make_estimate(v, q.method, branch)


def op_gb_dynamic_s2(q: OutageQuery, S: int = 100) -> OutageEstimate:
    _check_protocol(q, Dynamic)
    k = q.coeffs
    branch = _gb_dynamic_branch(k)
    if q.method is Method.EXACT:
        gf, _, _ = gf_dynamic_exact(q)
        v, err = q_dynamic_exact(q)
        return make_estimate(gf + v, q.method, branch, q=v, abs_error=err)
    gf_est = op_gf_dynamic_s2(q, S)
    if q.method is Method.CLOSED:
        v, branch = thm6_q(q, S)
        return make_estimate(gf_est.value + v, q.method, branch, gf_est.warnings, q=v)
    v, branch = cor21_gb_dynamic_asym(q, gf_est.value)
    return make_estimate(v, q.method, branch)


def op_gf_openloop_s2(q: OutageQuery, S: int = 100) -> OutageEstimate:
    _check_protocol(q, OpenLoop)
    branch = "rF>=gF/tau" if inv_sigma5(q) > 0 else "rF<gF/tau"
    if q.method is Method.EXACT:
        v, err = gf_openloop_exact(q)
        return make_estimate(v, q.method, branch, abs_error=err)
    if q.method is Method.CLOSED:
        if inv_sigma5(q) > 0:
            return make_estimate(cor18_gf_openloop(q, S), q.method, branch, order=S)
        return make_estimate(cor17_gf_openloop(q), q.method, branch, ("noise term dropped in y1",))
    v, _ = cor22_gf_openloop_asym(q, S)
    return make_estimate(v, q.method, branch)


def op_gb_openloop_s2(q: OutageQuery, S: int = 100) -> OutageEstimate:
    _check_protocol(q, OpenLoop)
    regime = openloop_regime(q)
    if q.method is Method.EXACT:
        gf, _ = gf_openloop_exact(q)
        v, err = q3_exact(q)
        return make_estimate(gf + v, q.method, regime, q3=v, abs_error=err)
    gf_est = op_gf_openloop_s2(q, S)
    if q.method is Method.CLOSED:
        v, regime = cor19_q3(q, S)
        return make_estimate(gf_est.value + v, q.method, regime, gf_est.warnings, q3=v)
    v, regime = cor23_gb_openloop_asym(q, gf_est.value)
    return make_estimate(v, q.method, regime)


def op_gf_dynamic_s2_asym(q):
    return op_gf_dynamic_s2(_with_method(q, Method.ASYM))


def op_gb_dynamic_s2_asym(q):
    return op_gb_dynamic_s2(_with_method(q, Method.ASYM))


def op_gf_openloop_s2_asym(q):
    return op_gf_openloop_s2(_with_method(q, Method.ASYM))


def op_gb_openloop_s2_asym(q):
    return op_gb_openloop_s2(_with_method(q, Method.ASYM))


def outage_s2(q: OutageQuery) -> OutageEstimate:
    dyn = isinstance(q.protocol, Dynamic)
    if q.user is User.GF:
        return op_gf_dynamic_s2(q) if dyn else op_gf_openloop_s2(q)
    return op_gb_dynamic_s2(q) if dyn else op_gb_openloop_s2(q)
