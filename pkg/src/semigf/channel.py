"""Spatial model: configurations, derived constants, gain statistics and
samplers for the combined gain g = |h|^2 d^-alpha.

Users sit uniformly in a disc of radius R1 (near region) or in the ring
(R1, R2) (far region); |h|^2 is exponential with mean lambda.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .special import helper_M, lower_incomplete_gamma, _lower_scalar, _upper_scalar


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (float(db) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class GeometryConfig:
    R1: float = 200.0
    R2: float = 600.0
    alpha: float = 2.8

    def __post_init__(self):
        if not (0 < self.R1 < self.R2):
            raise ValueError(f"need 0 < R1 < R2, got R1={self.R1}, R2={self.R2}")
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got alpha={self.alpha}")


@dataclass(frozen=True)
class RadioConfig:
    """Powers and noise in dBm, rates in bits per channel use."""

    P_GB: float = 10.0
    P_GF: float = 10.0
    sigma2: float = -90.0
    lambda_GB: float = 1.0
    lambda_GF: float = 1.0
    rate_GB: float = 1.5
    rate_GF: float = 1.0

    def __post_init__(self):
        for name in ("P_GB", "P_GF", "sigma2", "lambda_GB", "lambda_GF", "rate_GB", "rate_GF"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        for name in ("lambda_GB", "lambda_GF", "rate_GB", "rate_GF"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def rho_GB(self) -> float:
        return db_to_linear(self.P_GB - self.sigma2)

    @property
    def rho_GF(self) -> float:
        return db_to_linear(self.P_GF - self.sigma2)

    @property
    def gamma_GB(self) -> float:
        return 2.0**self.rate_GB - 1.0

    @property
    def gamma_GF(self) -> float:
        return 2.0**self.rate_GF - 1.0

    def with_rho_db(self, user: "User", rho_db: float) -> "RadioConfig":
        """Copy with the transmit SNR of ``user`` set to ``rho_db`` dB."""
        user = User(user)
        key = "P_GB" if user is User.GB else "P_GF"
        return replace(self, **{key: rho_db + self.sigma2})


class User(str, enum.Enum):
    GB = "GB"
    GF = "GF"


class Scenario(str, enum.Enum):
    I = "I"  # GB near, GF far
    II = "II"  # GF near, GB far

    def region_of(self, user) -> str:
        user = User(user)
        if self is Scenario.I:
            return "near" if user is User.GB else "far"
        return "far" if user is User.GB else "near"

    @property
    def swept_user(self) -> User:
        return User.GB if self is Scenario.I else User.GF


@dataclass(frozen=True)
class OpenLoop:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau_th must be > 0, got {self.tau}")

    name = "openloop"


@dataclass(frozen=True)
class Dynamic:
    name = "dynamic"


Protocol = OpenLoop | Dynamic


@dataclass(frozen=True)
class ScenarioProtocol:
    scenario: Scenario
    protocol: OpenLoop | Dynamic


# ---------------------------------------------------------------------------
# derived constants


@dataclass(frozen=True)
class GainCoefficients:
    """Per-user-class constants of the gain densities."""

    b11: float
    b12: float
    b21: float
    b22: float
    b3: float
    R1: float
    R2: float
    lam: float

    @property
    def delta(self) -> float:
        return self.b3 - 1.0


def gain_coefficients(geo: GeometryConfig, lam: float) -> GainCoefficients:
    a = geo.alpha
    d = 2.0 / a
    return GainCoefficients(
        b11=2.0 * lam**d / (a * geo.R1**2),
        b12=2.0 * lam**d / (a * (geo.R2**2 - geo.R1**2)),
        b21=geo.R1**a / lam,
        b22=geo.R2**a / lam,
        b3=d + 1.0,
        R1=geo.R1,
        R2=geo.R2,
        lam=lam,
    )


@dataclass(frozen=True)
class DerivedCoefficients:
    gb: GainCoefficients
    gf: GainCoefficients
    b3: float
    rho_GB: float
    rho_GF: float
    gamma_GB: float
    gamma_GF: float
    C1: float
    C2: float
    C3: float
    C4: float
    sigma0: float
    sigma1: float
    sigma2: float
    sigma3: float
    sigma4: float
    sigma5: float
    Upsilon: float
    Theta: float
    tau: float | None = None
    extras: dict = field(default_factory=dict, compare=False, repr=False)


def derive_coefficients(geo: GeometryConfig, radio: RadioConfig, tau: float | None = None) -> DerivedCoefficients:
    """All shorthand constants for one configuration.

    Branch boundaries that do not exist for the given thresholds are NaN.
    """
    a = geo.alpha
    if not a > 2:
        raise ValueError("alpha must exceed 2")
    gb = gain_coefficients(geo, radio.lambda_GB)
    gf = gain_coefficients(geo, radio.lambda_GF)
    b3 = gb.b3
    rB, rF = radio.rho_GB, radio.rho_GF
    gB, gF = radio.gamma_GB, radio.gamma_GF
    nan = float("nan")
    sigma2 = gF / rF
    sigma1 = gB / (rF * (1.0 - gB)) if gB < 1.0 else nan
    sigma3 = gF / (rB * (1.0 - gF)) if gF < 1.0 else nan
    sigma4 = gB / rB
    sigma0 = min(sigma2, tau) if tau is not None else nan
    sigma5 = gF * rB / (rF * tau - gF) if tau is not None and rF * tau > gF else nan
    C3 = 2.0 * geo.R1**a / ((a + 2.0) * radio.lambda_GF)
    ring = geo.R2**2 - geo.R1**2
    return DerivedCoefficients(
        gb=gb,
        gf=gf,
        b3=b3,
        rho_GB=rB,
        rho_GF=rF,
        gamma_GB=gB,
        gamma_GF=gF,
        C1=2.0 * radio.lambda_GB ** (2.0 / a) * gf.b12 / (a * geo.R1**2),
        C2=2.0 * gb.b12 * radio.lambda_GF ** (b3 - 1.0) / (a * geo.R1**2),
        C3=C3,
        C4=C3 * sigma2 * gb.b12,
        sigma0=sigma0,
        sigma1=sigma1,
        sigma2=sigma2,
        sigma3=sigma3,
        sigma4=sigma4,
        sigma5=sigma5,
        Upsilon=2.0 * gb.b21**b3 * radio.lambda_GB ** (2.0 / a) * gB / ((a + 2.0) * geo.R1**2 * rB),
        Theta=2.0 * sigma2 * (geo.R2 ** (2 + a) - geo.R1 ** (2 + a)) / ((2.0 + a) * ring * radio.lambda_GB),
        tau=tau,
    )


# ---------------------------------------------------------------------------
# gain statistics


def _near_cdf_z(z: float, d: float) -> float:
    if z <= 0.0:
        return 0.0
    if z < 1.0:
        term = 1.0
        total = 0.0
        for k in range(1, 200):
            term *= -z / k
            add = -d * term / (d + k)
            total += add
            if abs(add) < 1e-17 * abs(total):
                break
        return total
    return 1.0 - d * z ** (-d) * _lower_scalar(d, z)


def _near_sf_z(z: float, d: float) -> float:
    if z <= 0.0:
        return 1.0
    if z < 1.0:
        return 1.0 - _near_cdf_z(z, d)
    return d * z ** (-d) * _lower_scalar(d, z)


def _near_cdf_z_vec(z, d):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    small = (z > 0) & (z < 1.0)
    big = z >= 1.0
    if small.any():
        zs = z[small]
        term = np.ones_like(zs)
        total = np.zeros_like(zs)
        for k in range(1, 60):
            term = term * (-zs / k)
            total += -d * term / (d + k)
        out[small] = total
    if big.any():
        zb = z[big]
        out[big] = 1.0 - d * zb ** (-d) * lower_incomplete_gamma(d, zb)
    return out


def _near_sf_z_vec(z, d):
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    small = (z > 0) & (z < 1.0)
    big = z >= 1.0
    if small.any():
        out[small] = 1.0 - _near_cdf_z_vec(z[small], d)
    if big.any():
        zb = z[big]
        out[big] = d * zb ** (-d) * lower_incomplete_gamma(d, zb)
    return out


def _check_region(region):
    if region not in ("near", "far"):
        raise ValueError(f"region must be 'near' or 'far', got {region!r}")


def cdf_gain(region: str, c: GainCoefficients, x):
    """CDF of the combined gain in incomplete-gamma form (scalar or array)."""
    _check_region(region)
    d = c.delta
    if np.ndim(x) == 0:
        x = float(x)
        if x < 0 or math.isnan(x):
            raise ValueError("gain must be >= 0")
        if math.isinf(x):
            return 1.0
        if region == "near":
            return _near_cdf_z(c.b21 * x, d)
        r1, r2 = c.R1**2, c.R2**2
        # the ring is a difference of two discs; clamp the rounding at the ends
        return min(max((r2 * _near_cdf_z(c.b22 * x, d) - r1 * _near_cdf_z(c.b21 * x, d)) / (r2 - r1), 0.0), 1.0)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("gain must be >= 0")
    if region == "near":
        return _near_cdf_z_vec(c.b21 * x, d)
    r1, r2 = c.R1**2, c.R2**2
    return np.clip((r2 * _near_cdf_z_vec(c.b22 * x, d) - r1 * _near_cdf_z_vec(c.b21 * x, d)) / (r2 - r1), 0.0, 1.0)


def sf_gain(region: str, c: GainCoefficients, x):
    """1 - CDF, accurate in the upper tail."""
    _check_region(region)
    d = c.delta
    if np.ndim(x) == 0:
        x = float(x)
        if x < 0:
            raise ValueError("gain must be >= 0")
        if math.isinf(x):
            return 0.0
        if region == "near":
            return _near_sf_z(c.b21 * x, d)
        r1, r2 = c.R1**2, c.R2**2
        # the ring is a difference of two discs; clamp the rounding at the ends
        return min(max((r2 * _near_sf_z(c.b22 * x, d) - r1 * _near_sf_z(c.b21 * x, d)) / (r2 - r1), 0.0), 1.0)
    x = np.asarray(x, dtype=float)
    if region == "near":
        return _near_sf_z_vec(c.b21 * x, d)
    r1, r2 = c.R1**2, c.R2**2
    return np.clip((r2 * _near_sf_z_vec(c.b22 * x, d) - r1 * _near_sf_z_vec(c.b21 * x, d)) / (r2 - r1), 0.0, 1.0)


cdf_gain_gamma = cdf_gain


def cdf_gain_hyp(region: str, c: GainCoefficients, x) -> float:
    """CDF through the 2F2 closed form; for cross-checks only."""
    _check_region(region)
    x = float(x)
    if x < 0:
        raise ValueError("gain must be >= 0")
    if x == 0:
        return 0.0
    b3 = c.b3
    # int_0^x t^-b3 gamma(b3, b t) dt = M(x, 1 - b3, b3, b)
    if region == "near":
        return c.b11 * helper_M(x, 1.0 - b3, b3, c.b21, method="hyp")
    return c.b12 * (helper_M(x, 1.0 - b3, b3, c.b22, method="hyp") - helper_M(x, 1.0 - b3, b3, c.b21, method="hyp"))


def _far_gamma_diff_scalar(b3, z2, z1):
    if z1 > b3 + 1.0:
        return _upper_scalar(b3, z1) - _upper_scalar(b3, z2)
    return _lower_scalar(b3, z2) - _lower_scalar(b3, z1)


def pdf_gain(region: str, c: GainCoefficients, x):
    """Density of the combined gain (scalar or array, x > 0)."""
    _check_region(region)
    b3 = c.b3
    if np.ndim(x) == 0:
        x = float(x)
        if not x > 0:
            raise ValueError("gain must be > 0")
        if region == "near":
            return c.b11 * x ** (-b3) * _lower_scalar(b3, c.b21 * x)
        return c.b12 * x ** (-b3) * _far_gamma_diff_scalar(b3, c.b22 * x, c.b21 * x)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("gain must be > 0")
    if region == "near":
        return c.b11 * x ** (-b3) * lower_incomplete_gamma(b3, c.b21 * x)
    from .special import incomplete_gamma_difference

    return c.b12 * x ** (-b3) * incomplete_gamma_difference(b3, c.b22 * x, c.b21 * x)


def mean_gain(region: str, c: GainCoefficients, exclusion_radius: float = 0.0) -> float:
    """E[g] = lambda E[d^-alpha]; infinite in the disc without an exclusion radius."""
    _check_region(region)
    a = 2.0 / c.delta
    lo, hi = (exclusion_radius, c.R1) if region == "near" else (max(c.R1, exclusion_radius), c.R2)
    area = (c.R1**2 if region == "near" else c.R2**2 - c.R1**2)
    if lo <= 0:
        return math.inf
    # int_lo^hi 2 r^(1-a) dr / area
    return c.lam * 2.0 * (hi ** (2 - a) - lo ** (2 - a)) / ((2 - a) * area)


def _sample_distance(region: str, geo: GeometryConfig, n: int, rng: np.random.Generator, exclusion_radius=0.0):
    u = rng.random(n)
    if region == "near":
        r_lo2 = exclusion_radius**2
        return np.sqrt(r_lo2 + u * (geo.R1**2 - r_lo2))
    return np.sqrt(geo.R1**2 + u * (geo.R2**2 - geo.R1**2))


def sample_gain(region: str, geo: GeometryConfig, lambda_G: float, rng: np.random.Generator, size=None):
    """Draw |h|^2 d^-alpha with d uniform over the region and |h|^2 ~ Exp(lambda)."""
    _check_region(region)
    n = 1 if size is None else int(size)
    d = _sample_distance(region, geo, n, rng)
    h = rng.exponential(lambda_G, n)
    g = h * d ** (-geo.alpha)
    return float(g[0]) if size is None else g


def tau_th_average(
    geo: GeometryConfig,
    radio: RadioConfig,
    scenario: Scenario = Scenario.I,
    exclusion_radius: float = 1.0,
    method: str = "analytic",
    n_draws: int = 1_000_000,
    rng: np.random.Generator | int | None = 0,
) -> float:
    """Mean of (P_GB / P_GF) |h_GB|^2 d_GB^-alpha.

    In the disc the mean diverges for alpha > 2, so distances below
    ``exclusion_radius`` are excluded. ``method="sample"`` returns the
    sample mean over ``n_draws`` instead of the closed form.
    """
    if exclusion_radius < 0:
        raise ValueError("exclusion_radius must be >= 0")
    region = Scenario(scenario).region_of(User.GB)
    ratio = db_to_linear(radio.P_GB - radio.P_GF)
    if method == "analytic":
        c = gain_coefficients(geo, radio.lambda_GB)
        return float(ratio * mean_gain(region, c, exclusion_radius))
    if method != "sample":
        raise ValueError(f"unknown method {method!r}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    d = _sample_distance(region, geo, n_draws, rng, exclusion_radius)
    h = rng.exponential(radio.lambda_GB, n_draws)
    return float(ratio * np.mean(h * d ** (-geo.alpha)))
