"""Numerical kernels: incomplete gamma, hypergeometric series, the U and M
helper integrals and Chebyshev-Gauss quadrature.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 2000


class SeriesNonConvergence(ArithmeticError):
    """A truncated series failed to meet its tolerance within its term budget."""

    def __init__(self, message, partial_sum=None, n_terms=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.n_terms = n_terms


@dataclass(frozen=True)
class SeriesControl:
    rel_tolerance: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be > 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_SERIES = SeriesControl()


# ---------------------------------------------------------------------------
# incomplete gamma


def _check_gamma_args(a, x):
    if not (math.isfinite(a) and math.isfinite(x)):
        raise ValueError(f"non-finite incomplete gamma argument a={a!r}, x={x!r}")
    if a <= 0:
        raise ValueError(f"incomplete gamma needs a > 0, got {a!r}")
    if x < 0:
        raise ValueError(f"incomplete gamma needs x >= 0, got {x!r}")


def _lower_series(a: float, x: float) -> float:
    # gamma(a, x) = x^a e^-x sum_k x^k / (a (a+1) ... (a+k))
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return math.exp(a * math.log(x) - x) * total


def _upper_cf(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Gamma(a, x)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(a * math.log(x) - x) * h


def _lower_scalar(a: float, x: float) -> float:
    _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.gamma(a)
    if x < a + 1.0:
        return _lower_series(a, x)
    return math.gamma(a) - _upper_cf(a, x)


def _upper_scalar(a: float, x: float) -> float:
    _check_gamma_args(a, x)
    if x == 0.0:
        return math.gamma(a)
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return math.gamma(a) - _lower_series(a, x)
    return _upper_cf(a, x)


def _lower_series_vec(a, x):
    ap = a.copy()
    term = 1.0 / a
    total = term.copy()
    for _ in range(_MAX_ITER):
        ap += 1.0
        term = term * x / ap
        total += term
        if np.all(np.abs(term) <= np.abs(total) * _EPS):
            break
    with np.errstate(divide="ignore"):
        return np.exp(a * np.log(x) - x) * total


def _upper_cf_vec(a, x):
    # modified Lentz, converged lanes are dropped so the cost follows the slow tail
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    h = np.empty_like(x)
    idx = np.arange(x.size)
    aa, xx = a.copy(), x.copy()
    b = xx + 1.0 - aa
    c = np.full_like(xx, 1.0 / _FPMIN)
    d = 1.0 / b
    hh = d.copy()
    for i in range(1, _MAX_ITER):
        an = -i * (i - aa)
        b = b + 2.0
        d = an * d + b
        d[np.abs(d) < _FPMIN] = _FPMIN
        c = b + an / c
        c[np.abs(c) < _FPMIN] = _FPMIN
        d = 1.0 / d
        delta = d * c
        hh *= delta
        done = np.abs(delta - 1.0) < 4.0 * _EPS
        if done.any():
            h[idx[done]] = hh[done]
            keep = ~done
            idx, aa, xx, b, c, d, hh = idx[keep], aa[keep], xx[keep], b[keep], c[keep], d[keep], hh[keep]
            if idx.size == 0:
                break
    h[idx] = hh
    return np.exp(a * np.log(x) - x) * h


def _incgamma_vec(a, x, upper: bool):
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(x) | (x == np.inf))):
        raise ValueError("non-finite incomplete gamma argument")
    if np.any(a <= 0) or np.any(x < 0):
        raise ValueError("incomplete gamma needs a > 0 and x >= 0")
    ua, inv = np.unique(a, return_inverse=True)
    full = np.array([math.gamma(v) for v in ua])[inv].reshape(a.shape)
    out = np.empty(a.shape, dtype=float)
    zero = x == 0
    inf = np.isinf(x)
    ser = (x < a + 1.0) & ~zero
    cf = ~ser & ~zero & ~inf
    if upper:
        out[zero] = full[zero]
        out[inf] = 0.0
    else:
        out[zero] = 0.0
        out[inf] = full[inf]
    if ser.any():
        low = _lower_series_vec(a[ser], x[ser])
        out[ser] = full[ser] - low if upper else low
    if cf.any():
        up = _upper_cf_vec(a[cf], x[cf])
        out[cf] = up if upper else full[cf] - up
    return out


def lower_incomplete_gamma(a, x):
    """gamma(a, x) = int_0^x t^(a-1) e^-t dt.

    Series for x < a + 1, continued-fraction complement otherwise. Accepts
    scalars (returns float) or arrays (returns ndarray).
    """
    if np.ndim(a) == 0 and np.ndim(x) == 0:
        return _lower_scalar(float(a), float(x))
    return _incgamma_vec(a, x, upper=False)


def upper_incomplete_gamma(a, x):
    """Gamma(a, x) = int_x^inf t^(a-1) e^-t dt."""
    if np.ndim(a) == 0 and np.ndim(x) == 0:
        return _upper_scalar(float(a), float(x))
    return _incgamma_vec(a, x, upper=True)


def incomplete_gamma_difference(a, x_hi, x_lo):
    """gamma(a, x_hi) - gamma(a, x_lo) for x_hi >= x_lo, without cancellation.

    When both arguments sit in the tail the difference is taken between upper
    functions instead.
    """
    if np.ndim(x_hi) == 0 and np.ndim(x_lo) == 0:
        if x_lo > a + 1.0:
            return _upper_scalar(a, x_lo) - _upper_scalar(a, x_hi)
        return _lower_scalar(a, x_hi) - _lower_scalar(a, x_lo)
    x_hi, x_lo = np.broadcast_arrays(np.asarray(x_hi, float), np.asarray(x_lo, float))
    tail = x_lo > a + 1.0
    out = np.empty(x_hi.shape)
    if tail.any():
        out[tail] = _incgamma_vec(a, x_lo[tail], True) - _incgamma_vec(a, x_hi[tail], True)
    if (~tail).any():
        out[~tail] = _incgamma_vec(a, x_hi[~tail], False) - _incgamma_vec(a, x_lo[~tail], False)
    return out


def truncated_gamma_expansion(a: float, x: float, n_terms: int = 2) -> float:
    """First ``n_terms`` terms of sum_n (-1)^n x^(a+n) / (n! (a+n))."""
    if a <= 0:
        raise ValueError("a must be > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if x == 0:
        return 0.0
    total = 0.0
    fact = 1.0
    for n in range(n_terms):
        if n:
            fact *= n
        total += (-1) ** n * x ** (a + n) / (fact * (a + n))
    return total


# ---------------------------------------------------------------------------
# generalized hypergeometric series


def _check_denominators(denom):
    for b in denom:
        if b <= 0 and float(b).is_integer():
            raise ValueError(f"denominator parameter {b} is a nonpositive integer")


def _float_pass(numer, denom, z, ctrl):
    term = 1.0
    total = 1.0
    peak = 1.0
    for k in range(ctrl.max_terms):
        num = 1.0
        for a in numer:
            num *= a + k
        if num == 0.0:
            return total, peak, k + 1
        den = float(k + 1)
        for b in denom:
            den *= b + k
        ratio = num / den * z
        term *= ratio
        if not math.isfinite(term):
            raise SeriesNonConvergence("hypergeometric terms overflowed", total, k + 1)
        total += term
        peak = max(peak, abs(term))
        if abs(term) < ctrl.rel_tolerance * abs(total) and abs(ratio) < 1.0:
            return total, peak, k + 2
    raise SeriesNonConvergence(
        f"hypergeometric series not converged after {ctrl.max_terms} terms (z={z})",
        total,
        ctrl.max_terms,
    )


def _decimal_pass(numer, denom, z, ctrl, digits):
    with localcontext() as ctx:
        ctx.prec = digits
        dn = [Decimal(a) for a in numer]
        dd = [Decimal(b) for b in denom]
        dz = Decimal(z)
        tol = Decimal(ctrl.rel_tolerance)
        term = Decimal(1)
        total = Decimal(1)
        for k in range(ctrl.max_terms):
            num = Decimal(1)
            for a in dn:
                num *= a + k
            if num == 0:
                return float(total)
            den = Decimal(k + 1)
            for b in dd:
                den *= b + k
            ratio = num / den * dz
            term *= ratio
            total += term
            if abs(term) < tol * abs(total) and abs(ratio) < 1:
                return float(total)
    raise SeriesNonConvergence("hypergeometric series not converged (extended pass)", float(total), ctrl.max_terms)


def gen_hypergeometric(
    numer: Sequence[float],
    denom: Sequence[float],
    z: float,
    ctrl: SeriesControl | None = None,
) -> float:
    """pFq(numer; denom; z) by direct summation.

    Alternating series whose terms grow far beyond the final sum are re-summed
    with enough guard digits to absorb the cancellation. Raises
    ``SeriesNonConvergence`` when the tolerance is not met within
    ``ctrl.max_terms`` terms (e.g. p = q + 1 with |z| >= 1).
    """
    ctrl = ctrl or DEFAULT_SERIES
    _check_denominators(denom)
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    if z == 0.0:
        return 1.0
    total, peak, _ = _float_pass(numer, denom, z, ctrl)
    loss = peak / max(abs(total), _FPMIN)
    if loss * _EPS <= ctrl.rel_tolerance * 1e-2:
        return total
    # the float sum may itself be garbage, so size the guard digits from the
    # peak term and repeat once the true magnitude is known
    guard = 10 + int(-math.log10(ctrl.rel_tolerance))
    digits = guard + int(math.ceil(math.log10(peak))) + 10
    for _ in range(4):
        value = _decimal_pass(numer, denom, z, ctrl, digits)
        needed = guard + int(math.ceil(math.log10(peak / max(abs(value), _FPMIN))))
        if needed <= digits:
            return value
        digits = needed + 10
    raise SeriesNonConvergence("hypergeometric cancellation could not be resolved", value, ctrl.max_terms)


# ---------------------------------------------------------------------------
# helper integrals


def _lerch_phi(z: float, s: float, n: int = 40) -> float:
    # Phi(z, 1, s) = int_0^1 u^(s-1) / (1 - z u) du, Gauss-Jacobi in (1+v)^(s-1)
    from scipy.special import roots_jacobi

    v, w = roots_jacobi(n, 0.0, s - 1.0)
    u = 0.5 * (1.0 + v)
    return float(2.0 ** (-s) * np.sum(w / (1.0 - z * u)))


def _f32_integral(b3: float, z: float) -> float:
    # 3F2(1, b, c; b+1, c+1; z) = b c / (c - b) [Phi(z, 1, b) - Phi(z, 1, c)]
    b, c = b3, 2.0 - b3
    return b * c / (c - b) * (_lerch_phi(z, b) - _lerch_phi(z, c))


def _u_direct(a: float, t: float, b3: float, ctrl) -> float:
    z = -t / a
    theta1 = -(t**b3) * math.gamma(1.0) / (b3 * (2.0 - b3) * a ** (2.0 - b3))
    theta2 = math.gamma(2.0 - b3) * math.gamma(b3 - 1.0) / (2.0 * (1.0 - b3) * t ** (2.0 * (1.0 - b3)))
    try:
        f32 = gen_hypergeometric([1.0, b3, 2.0 - b3], [b3 + 1.0, 3.0 - b3], z, ctrl)
    except SeriesNonConvergence:
        f32 = _f32_integral(b3, z)
    return f32 * theta1 - theta2


def helper_U(a: float, t: float, b3: float, ctrl: SeriesControl | None = None) -> float:
    """U(a, t) = int_0^inf x^(1-2 b3) gamma(b3-1, a x) gamma(b3, t x) dx.

    The 3F2 form converges for t <= a; for t > a the reflection
    U(a, t) + U(t, a) = (a t)^(b3-1) / (b3-1)^2 is used.
    """
    if not 1.0 < b3 < 2.0:
        raise ValueError(f"b3 = {b3} outside (1, 2); the path-loss exponent must exceed 2")
    if a <= 0 or t <= 0:
        raise ValueError("U needs a > 0 and t > 0")
    if t <= a:
        return _u_direct(a, t, b3, ctrl)
    d = b3 - 1.0
    return (a * t) ** d / d**2 - _u_direct(t, a, b3, ctrl)


def helper_M(
    t: float,
    alpha_p: float,
    beta_p: float,
    delta_p: float,
    method: str = "auto",
    ctrl: SeriesControl | None = None,
) -> float:
    """M(t, a, b, d) = int_0^t x^(a-1) gamma(b, d x) dx.

    ``method="hyp"`` uses the 2F2 closed form, ``"gamma"`` the equivalent
    [t^a gamma(b, d t) - d^-a gamma(a+b, d t)] / a, and ``"auto"`` picks the
    2F2 form while d t stays moderate.
    """
    if alpha_p + beta_p <= 0:
        raise ValueError("M needs alpha + beta > 0")
    if beta_p <= 0 or delta_p <= 0 or t < 0:
        raise ValueError("M needs beta > 0, delta > 0, t >= 0")
    if t == 0:
        return 0.0
    if method == "auto":
        method = "hyp" if t * delta_p <= 25.0 else "gamma"
    s = alpha_p + beta_p
    if method == "hyp":
        f22 = gen_hypergeometric([beta_p, s], [beta_p + 1.0, s + 1.0], -t * delta_p, ctrl)
        # B(1, s) = 1 / s
        return t**s * delta_p**beta_p / beta_p / s * f22
    if method == "gamma":
        if alpha_p == 0:
            raise ValueError("gamma-form M is singular at alpha = 0; use method='hyp'")
        dt = delta_p * t
        return (t**alpha_p * _lower_scalar(beta_p, dt) - delta_p ** (-alpha_p) * _lower_scalar(s, dt)) / alpha_p
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Chebyshev-Gauss quadrature


@dataclass(frozen=True)
class QuadratureNodes:
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def mapped(self, a: float, b: float) -> np.ndarray:
        return (self.nodes + 1.0) * (b - a) / 2.0 + a


@lru_cache(maxsize=32)
def chebyshev_nodes(order: int) -> QuadratureNodes:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    s = np.arange(1, order + 1)
    x = np.cos((2 * s - 1) * np.pi / (2 * order))
    w = np.full(order, np.pi / order)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureNodes(order, x, w)


DEFAULT_ORDER = 100


def cheb_gauss_integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, S: int = DEFAULT_ORDER) -> float:
    """int_a^b f(x) dx ~ sum_s (b-a) w_s / 2 * sqrt(1 - x_s^2) * f(t_s).

    ``f`` must accept an array of abscissae.
    """
    if not a < b:
        raise ValueError("need a < b")
    q = chebyshev_nodes(S)
    t = q.mapped(a, b)
    vals = np.asarray(f(t), dtype=float)
    return float(np.sum((b - a) * q.weights / 2.0 * np.sqrt(1.0 - q.nodes**2) * vals))
