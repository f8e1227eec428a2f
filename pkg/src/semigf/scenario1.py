"""Scenario I outage: GB user in the disc (decoded first), GF user in the ring.

x denotes the GF gain throughout; the near (GB) gain enters through
its CDF at the thresholds

    y1(x) = gB (rF x + 1) / rB     (GB SINR threshold)
    c x,  c = rF / rB              (dynamic admission boundary)
"""
from __future__ import annotations

import math

import numpy as np

from .channel import Dynamic, OpenLoop, User, cdf_gain, cdf_gain_hyp, pdf_gain, sf_gain
from .outage import (
    BranchDomainError,
    Method,
    OutageQuery,
    OutageEstimate,
    far_integral,
    make_estimate,
    near_mass,
)
from .quad import cheb_panels
from .special import (
    SeriesNonConvergence,
    helper_M,
    helper_U,
    incomplete_gamma_difference,
    lower_incomplete_gamma,
)

SERIES_MAX_N = 60
LOW_RHO_GF = 1e3


def _thresholds(q: OutageQuery):
    k = q.coeffs
    rB, rF, gB = k.rho_GB, k.rho_GF, k.gamma_GB
    y1 = lambda x: gB * (rF * x + 1.0) / rB
    c = rF / rB
    return y1, c


def _check_protocol(q: OutageQuery, kind):
    if not isinstance(q.protocol, kind):
        raise TypeError(f"expected {kind.__name__} protocol, got {q.protocol!r}")


# ---------------------------------------------------------------------------
# exact (adaptive quadrature of the defining integrals)


def gb_dynamic_exact(q: OutageQuery):
    k = q.coeffs
    y1, c = _thresholds(q)
    near, far = q.near, q.far
    if k.gamma_GB >= 1.0:
        hi, branch = math.inf, "gB>=1"
    else:
        hi, branch = k.sigma1, "gB<1"
    v, e = far_integral(lambda x: near_mass(near, c * x, y1(x)), far, 0.0, hi, breaks=[k.sigma2])
    return v, branch, e


def q1_exact(q: OutageQuery):
    k = q.coeffs
    y1, c = _thresholds(q)
    near, far = q.near, q.far
    v, e = far_integral(lambda x: sf_gain("near", near, max(y1(x), c * x)), far, 0.0, k.sigma2, breaks=[k.sigma1])
    return v, e


def gb_openloop_exact(q: OutageQuery):
    tau = q.protocol.tau
    y1, _ = _thresholds(q)
    v, e = far_integral(lambda x: cdf_gain("near", q.near, y1(x)), q.far, 0.0, tau)
    return v, e


def q2_exact(q: OutageQuery):
    k = q.coeffs
    y1, _ = _thresholds(q)
    v, e = far_integral(lambda x: sf_gain("near", q.near, y1(x)), q.far, 0.0, k.sigma0)
    return v, e


# ---------------------------------------------------------------------------
# closed forms


def _far_diff(far, x):
    return incomplete_gamma_difference(far.b3, far.b22 * x, far.b21 * x)


def cor3_gb_dynamic(q: OutageQuery, max_n: int = SERIES_MAX_N):
    """gB > 1: U-function term minus the (n, t) double series."""
    k = q.coeffs
    gb, gf = k.gb, k.gf
    d, b3 = gb.delta, k.b3
    rB, rF, gB = k.rho_GB, k.rho_GF, k.gamma_GB
    a = gb.b21 * rF / rB
    i1 = k.C1 * (rB / rF) ** d * (helper_U(a, gf.b22, b3) - helper_U(a, gf.b21, b3))
    ratio = gB * rF * gb.b21 / (rB * gf.b21)
    total = 0.0
    last = []
    for n in range(max_n + 1):
        row = 0.0
        for t in range(n + 1):
            m = n - t
            # log-magnitude of C(n,t) (gB/rB)^n rF^m b21B^(d+n) / (n! (d+n)) m!/(m-d) b21F^(d-m)
            lg = (
                math.lgamma(n + 1) - math.lgamma(t + 1) - math.lgamma(m + 1)
                + n * math.log(gB / rB) + m * math.log(rF) + (d + n) * math.log(gb.b21)
                - math.lgamma(n + 1) + math.lgamma(m + 1) + (d - m) * math.log(gf.b21)
            )
            bracket = 1.0 - (gf.b22 / gf.b21) ** (d - m)
            row += (-1) ** n * math.exp(lg) * bracket / ((d + n) * (m - d))
        total += row
        last.append(abs(row))
        if n >= 4 and max(last[-3:]) < 1e-15 * max(abs(total), 1e-300):
            return i1 - k.C1 * total, {"terms": n + 1, "ratio": ratio}
    raise SeriesNonConvergence(
        f"double series did not decay (gB rF lambdaF / (rB lambdaGB) = {ratio:.3g}; needs < 1)",
        i1 - k.C1 * total,
        max_n,
    )


def _i2_quadrature(q: OutageQuery, lo: float, hi: float, S: int):
    # int_lo^hi sf_near(y1(x)) f_far(x) dx written with Lambda_1 style weights
    k = q.coeffs
    gb, gf = k.gb, k.gf
    d, b3 = gb.delta, k.b3
    rB, rF, gB = k.rho_GB, k.rho_GF, k.gamma_GB

    def f(x):
        lam1 = k.C1 * x ** (-b3) * rB**d * (gB * (rF * x + 1.0)) ** (-d)
        return lam1 * lower_incomplete_gamma(d, gb.b21 * gB * (rF * x + 1.0) / rB) * _far_diff(gf, x)

    return cheb_panels(f, lo, hi, gf, S)


def _i4_quadrature(q: OutageQuery, lo: float, hi: float, S: int):
    # int_lo^hi sf_near(c x) f_far(x) dx with Lambda_2 style weights
    k = q.coeffs
    gb, gf = k.gb, k.gf
    d, b3 = gb.delta, k.b3
    rB, rF = k.rho_GB, k.rho_GF

    def f(x):
        lam2 = k.C1 * x ** (1.0 - 2.0 * b3) * rB**d * rF ** (-d)
        return lam2 * lower_incomplete_gamma(d, gb.b21 * rF / rB * x) * _far_diff(gf, x)

    return cheb_panels(f, lo, hi, gf, S)


def cor4_gb_dynamic(q: OutageQuery, S: int = 100):
    """gB <= 1: I3 - I4 on [0, sigma1] by Chebyshev-Gauss sums."""
    k = q.coeffs
    s1 = k.sigma1
    Ff = cdf_gain("far", k.gf, s1)
    i3 = Ff - _i2_quadrature(q, 0.0, s1, S)
    i4 = Ff - _i4_quadrature(q, 0.0, s1, S)
    return i3 - i4


def _q_series(q: OutageQuery, sigma: float, tol: float = 1e-15, max_n: int = 400):
    # int_0^sigma sf_near(y1(x)) f_far(x) dx via the gamma expansion, binomial
    # expansion and M(sigma, q, b3, b) = sigma^q M(1, q, b3, b sigma)
    k = q.coeffs
    gb, gf = k.gb, k.gf
    d, b3 = gb.delta, k.b3
    rB, rF, gB = k.rho_GB, k.rho_GF, k.gamma_GB
    total = 0.0
    big = 0.0
    small_run = 0
    mcache = {}

    def mdiff(m):
        if m not in mcache:
            qq = m - d
            mcache[m] = sigma**qq * (
                helper_M(1.0, qq, b3, gf.b22 * sigma) - helper_M(1.0, qq, b3, gf.b21 * sigma)
            )
        return mcache[m]

    for n in range(max_n + 1):
        row = 0.0
        for t in range(n + 1):
            m = n - t
            coef = math.exp(
                math.lgamma(n + 1) - math.lgamma(t + 1) - math.lgamma(m + 1) - math.lgamma(n + 1)
                + n * math.log(gB * gb.b21 / rB) + m * math.log(rF) + d * math.log(gb.b21)
            )
            row += coef / (d + n) * mdiff(m)
        row *= (-1) ** n
        total += row
        big = max(big, abs(row))
        small_run = small_run + 1 if abs(row) < tol * abs(total) else 0
        if small_run >= 2:
            return k.C1 * total, {"terms": n + 1, "cancellation": big / max(abs(total), 1e-300)}
    raise SeriesNonConvergence("Q series did not converge", k.C1 * total, max_n)


def cor5_q1(q: OutageQuery):
    return _q_series(q, q.coeffs.sigma2)


def cor6_q1(q: OutageQuery, S: int = 100):
    return _i2_quadrature(q, 0.0, q.coeffs.sigma2, S)


def cor7_q1(q: OutageQuery, S: int = 100):
    k = q.coeffs
    return _i2_quadrature(q, 0.0, k.sigma1, S) + _i4_quadrature(q, k.sigma1, k.sigma2, S)


def cor8_gb_openloop(q: OutageQuery, form: str = "gamma", S: int = 100):
    """Chebyshev-Gauss evaluation of int_0^tau F_near(y1) f_far dx.

    ``form="hyp"`` uses the 2F2 CDF inside the sum, ``"gamma"`` the
    incomplete-gamma CDF.
    """
    k = q.coeffs
    gb, gf = k.gb, k.gf
    y1, _ = _thresholds(q)
    tau = q.protocol.tau
    if form == "hyp":
        Fn = np.vectorize(lambda x: cdf_gain_hyp("near", gb, y1(x)), otypes=[float])
    elif form == "gamma":
        Fn = lambda x: cdf_gain("near", gb, y1(np.asarray(x)))
    else:
        raise ValueError(f"unknown form {form!r}")
    return cheb_panels(lambda x: Fn(x) * pdf_gain("far", gf, x), 0.0, tau, gf, S)


def cor9_gb_openloop(q: OutageQuery):
    """tau -> infinity: every GF user admitted, the +1 noise term dropped."""
    k = q.coeffs
    gb, gf = k.gb, k.gf
    d, b3 = gb.delta, k.b3
    rB, rF, gB = k.rho_GB, k.rho_GF, k.gamma_GB
    a = gB * rF * gb.b21 / rB
    pref = 2.0 * gf.b12 / (2.0 / d * gb.R1**2) * (rB * gb.lam / (gB * rF)) ** d
    return cdf_gain("far", gf, q.protocol.tau) - pref * (helper_U(a, gf.b22, b3) - helper_U(a, gf.b21, b3))


def cor10_q2(q: OutageQuery, S: int = 100):
    return _i2_quadrature(q, 0.0, q.coeffs.sigma0, S)


def cor11_q2(q: OutageQuery):
    return _q_series(q, q.coeffs.sigma0)


# ---------------------------------------------------------------------------
# asymptotics (rho_GB -> infinity)


def _mdiff(far, t, ap):
    b3 = far.b3
    return helper_M(t, ap, b3, far.b22) - helper_M(t, ap, b3, far.b21)


def p_inf_openloop(q: OutageQuery, tau: float) -> float:
    """Linearised GB open-loop outage int_0^tau Upsilon (rF x + 1) f_far dx."""
    k = q.coeffs
    gf = k.gf
    if math.isinf(tau):
        return prop1_p_inf(q)
    return k.Upsilon * (k.rho_GF * gf.b12 * _mdiff(gf, tau, 2.0 - k.b3) + cdf_gain("far", gf, tau))


def prop1_p_inf(q: OutageQuery) -> float:
    k = q.coeffs
    gf, b3 = k.gf, k.b3
    mean = gf.b12 * math.gamma(2.0) / (2.0 - b3) * (gf.b21 ** (b3 - 2.0) - gf.b22 ** (b3 - 2.0))
    return k.Upsilon * (k.rho_GF * mean + 1.0)


def cor12_gb_dynamic_asym(q: OutageQuery, S: int = 100):
    k = q.coeffs
    gb, gf = k.gb, k.gf
    d, b3 = gb.delta, k.b3
    rB, rF = k.rho_GB, k.rho_GF
    if k.gamma_GB >= 1.0:
        a = gb.b21 * rF / rB
        i1 = k.C1 * (rB / rF) ** d * (helper_U(a, gf.b22, b3) - helper_U(a, gf.b21, b3))
        return i1 - 1.0 + prop1_p_inf(q), "gB>=1"
    # linearised F_near(y1) minus exact F_near(c x), integrated as one term so the
    # O(1/rho) result is not left over from a cancellation of O(1) pieces
    c = rF / rB

    def f(x):
        return (k.Upsilon * (rF * x + 1.0) - cdf_gain("near", gb, c * x)) * pdf_gain("far", gf, x)

    return cheb_panels(f, 0.0, k.sigma1, gf, S), "gB<1"


def cor13_gf_dynamic_asym(q: OutageQuery, p_gb: float, S: int = 100):
    k = q.coeffs
    gf = k.gf
    if k.gamma_GB > k.gamma_GF / (1.0 + k.gamma_GF):
        s2 = k.sigma2
        return cdf_gain("far", gf, s2) - p_inf_openloop(q, s2) + p_gb, "a"
    s1, s2 = k.sigma1, k.sigma2
    extra = _i4_quadrature(q, s1, s2, S)
    return cdf_gain("far", gf, s1) - p_inf_openloop(q, s1) + p_gb + extra, "b"


def cor15_gf_openloop_asym(q: OutageQuery):
    k = q.coeffs
    s0 = k.sigma0
    return cdf_gain("far", k.gf, s0) - p_inf_openloop(q, s0) + p_inf_openloop(q, q.protocol.tau)


# ---------------------------------------------------------------------------
# public operations


def _warn_low_rho(q):
    if q.coeffs.rho_GF < LOW_RHO_GF:
        return ("rho_GF below 30 dB: the high-SNR closed form may drift from the exact value",)
    return ()


def op_gb_dynamic_s1(q: OutageQuery, S: int = 100) -> OutageEstimate:
    _check_protocol(q, Dynamic)
    k = q.coeffs
    if q.method is Method.EXACT:
        v, branch, err = gb_dynamic_exact(q)
        return make_estimate(v, q.method, branch, abs_error=err)
    if q.method is Method.CLOSED:
        if k.gamma_GB >= 1.0:
            try:
                v, diag = cor3_gb_dynamic(q)
                return make_estimate(v, q.method, "gB>=1:U-series", _warn_low_rho(q), **diag)
            except SeriesNonConvergence as exc:
                # quadrature of the same I1 - I2 split
                hi = 1e3 / k.gf.b21
                v = _i4_quadrature(q, 0.0, hi, S) - _i2_quadrature(q, 0.0, hi, S)
                return make_estimate(v, q.method, "gB>=1:quadrature", (str(exc),), order=S)
        return make_estimate(cor4_gb_dynamic(q, S), q.method, "gB<1:quadrature", order=S)
    v, branch = cor12_gb_dynamic_asym(q, S)
    return make_estimate(v, q.method, branch)


def op_gf_dynamic_s1(q: OutageQuery, S: int = 100, form: str = "series") -> OutageEstimate:
    _check_protocol(q, Dynamic)
    k = q.coeffs
    gb_est = op_gb_dynamic_s1(q if q.method is not Method.ASYM else _with_method(q, Method.EXACT), S)
    branch_a = k.gamma_GB > k.gamma_GF / (1.0 + k.gamma_GF)
    if q.method is Method.EXACT:
        v, err = q1_exact(q)
        return make_estimate(v + gb_est.value, q.method, "a" if branch_a else "b", q1=v, abs_error=err)
    if q.method is Method.CLOSED:
        if branch_a:
            if form == "series":
                q1, diag = cor5_q1(q)
            else:
                q1, diag = cor6_q1(q, S), {"order": S}
            return make_estimate(q1 + gb_est.value, q.method, f"a:{form}", gb_est.warnings, q1=q1, **diag)
        q1 = cor7_q1(q, S)
        return make_estimate(q1 + gb_est.value, q.method, "b:quadrature", gb_est.warnings, q1=q1)
    v, branch = cor13_gf_dynamic_asym(q, gb_est.value, S)
    return make_estimate(v, q.method, branch)


def op_gb_openloop_s1(q: OutageQuery, S: int = 100, form: str = "gamma") -> OutageEstimate:
    _check_protocol(q, OpenLoop)
    if q.method is Method.EXACT:
        v, err = gb_openloop_exact(q)
        return make_estimate(v, q.method, "openloop", abs_error=err)
    if q.method is Method.CLOSED:
        if form == "tau-inf":
            return make_estimate(cor9_gb_openloop(q), q.method, "tau-inf")
        return make_estimate(cor8_gb_openloop(q, form, S), q.method, f"quadrature:{form}", order=S)
    return make_estimate(p_inf_openloop(q, q.protocol.tau), q.method, "openloop")


def op_gf_openloop_s1(q: OutageQuery, S: int = 100, form: str = "series") -> OutageEstimate:
    _check_protocol(q, OpenLoop)
    k = q.coeffs
    branch = "sigma0=tau" if q.protocol.tau <= k.sigma2 else "sigma0=sigma2"
    if q.method is Method.EXACT:
        gb, _ = gb_openloop_exact(q)
        v, err = q2_exact(q)
        return make_estimate(gb + v, q.method, branch, q2=v, abs_error=err)
    if q.method is Method.CLOSED:
        gb = op_gb_openloop_s1(q, S).value
        if form == "series":
            q2, diag = cor11_q2(q)
        else:
            q2, diag = cor10_q2(q, S), {"order": S}
        return make_estimate(gb + q2, q.method, f"{branch}:{form}", q2=q2, **diag)
    return make_estimate(cor15_gf_openloop_asym(q), q.method, branch)


def op_gb_dynamic_s1_asym(q: OutageQuery) -> OutageEstimate:
    return op_gb_dynamic_s1(_with_method(q, Method.ASYM))


def op_gf_dynamic_s1_asym(q: OutageQuery) -> OutageEstimate:
    return op_gf_dynamic_s1(_with_method(q, Method.ASYM))


def op_gb_openloop_s1_asym(q: OutageQuery) -> OutageEstimate:
    return op_gb_openloop_s1(_with_method(q, Method.ASYM))


def op_gf_openloop_s1_asym(q: OutageQuery) -> OutageEstimate:
    return op_gf_openloop_s1(_with_method(q, Method.ASYM))


def _with_method(q: OutageQuery, method: Method) -> OutageQuery:
    return OutageQuery(q.geo, q.radio, q.protocol, q.user, method, q.scenario)


def outage_s1(q: OutageQuery) -> OutageEstimate:
    dyn = isinstance(q.protocol, Dynamic)
    if q.user is User.GB:
        return op_gb_dynamic_s1(q) if dyn else op_gb_openloop_s1(q)
    return op_gf_dynamic_s1(q) if dyn else op_gf_openloop_s1(q)
