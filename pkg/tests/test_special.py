import math

import mpmath as mp
import numpy as np
import pytest

from semigf.special import (
    SeriesControl,
    SeriesNonConvergence,
    cheb_gauss_integrate,
    chebyshev_nodes,
    gen_hypergeometric,
    helper_M,
    helper_U,
    incomplete_gamma_difference,
    lower_incomplete_gamma,
    truncated_gamma_expansion,
    upper_incomplete_gamma,
)

B3 = 1.0 + 2.0 / 2.8


@pytest.mark.parametrize("a", [0.3, 1.0, B3, 2.5, 7.0])
@pytest.mark.parametrize("x", [0.0, 1e-8, 0.1, 1.0, 2.7, 10.0, 50.0, 300.0])
def test_incomplete_gamma_vs_mpmath(a, x):
    lo = lower_incomplete_gamma(a, x)
    up = upper_incomplete_gamma(a, x)
    assert lo == pytest.approx(float(mp.gammainc(a, 0, x)), rel=1e-12, abs=1e-300)
    assert up == pytest.approx(float(mp.gammainc(a, x, mp.inf)), rel=1e-12, abs=1e-300)


def test_incomplete_gamma_vectorised_matches_scalar():
    x = np.array([0.0, 0.5, 3.0, 40.0])
    v = lower_incomplete_gamma(B3, x)
    assert np.allclose(v, [lower_incomplete_gamma(B3, float(t)) for t in x], rtol=1e-14, atol=0)


@pytest.mark.parametrize("a, x", [(-1.0, 1.0), (0.0, 1.0), (1.0, -0.1), (1.0, math.nan)])
def test_incomplete_gamma_domain(a, x):
    with pytest.raises(ValueError):
        lower_incomplete_gamma(a, x)


def test_gamma_difference_in_the_tail():
    # both arguments deep in the tail: direct lower difference would be 0
    got = incomplete_gamma_difference(B3, 80.0, 60.0)
    ref = float(mp.gammainc(B3, 60, 80))
    assert got == pytest.approx(ref, rel=1e-10)


def test_truncated_expansion_small_argument():
    x = 1e-3
    assert truncated_gamma_expansion(B3, x, 3) == pytest.approx(lower_incomplete_gamma(B3, x), rel=1e-10)
    with pytest.raises(ValueError):
        truncated_gamma_expansion(B3, x, 0)


@pytest.mark.parametrize("z, ref", [(-30.0, 0.073577212962037301), (-317.0, 0.0074581539879238334)])
def test_hyp2f2_frozen(z, ref):
    # values from mpmath.hyp2f2 at 30 digits
    assert gen_hypergeometric([B3, 1.0], [B3 + 1.0, 2.0], z) == pytest.approx(ref, rel=1e-10)


def test_hypergeometric_identities():
    assert gen_hypergeometric([1.0], [], 0.0) == 1.0
    # 1F0(1;;z) = 1/(1-z) for |z| < 1
    assert gen_hypergeometric([1.0], [], 0.3) == pytest.approx(1 / 0.7, rel=1e-12)
    # 0F0(;;z) = e^z
    assert gen_hypergeometric([], [], -5.0) == pytest.approx(math.exp(-5.0), rel=1e-10)


def test_hypergeometric_divergent_raises():
    with pytest.raises(SeriesNonConvergence) as ei:
        gen_hypergeometric([1.0, 1.0], [2.0], 1.5, SeriesControl(max_terms=200))
    assert ei.value.n_terms is not None


def test_hypergeometric_bad_denominator():
    with pytest.raises(ValueError):
        gen_hypergeometric([1.0], [-2.0], 0.5)


@pytest.mark.parametrize(
    "a, t, ref",
    [
        (1.0, 0.5, 0.45930448415416223),
        (2.0, 3.0, 4.0063635925949617),
        (0.3, 0.3, 0.17549164284013541),
        (5.0, 0.01, 0.0034279550199859567),
    ],
)
def test_helper_U_frozen(a, t, ref):
    # references: mpmath.quad of the defining integral, 30 digits
    assert helper_U(a, t, B3) == pytest.approx(ref, rel=1e-9)


def test_helper_U_reflection():
    a, t = 0.7, 2.2
    d = B3 - 1.0
    assert helper_U(a, t, B3) + helper_U(t, a, B3) == pytest.approx((a * t) ** d / d**2, rel=1e-12)


def test_helper_U_domain():
    with pytest.raises(ValueError):
        helper_U(1.0, 1.0, 2.5)
    with pytest.raises(ValueError):
        helper_U(0.0, 1.0, B3)


@pytest.mark.parametrize(
    "t, ap, d, ref",
    [
        (1.0, 2 - B3, 3.0, 0.67565894724590377),
        (2.0, 1 - B3, 0.5, 0.26600757020923518),
        (10.0, 2 - B3, 4.0, 3.8035650645105126),
    ],
)
@pytest.mark.parametrize("method", ["hyp", "gamma", "auto"])
def test_helper_M_frozen(t, ap, d, ref, method):
    assert helper_M(t, ap, B3, d, method=method) == pytest.approx(ref, rel=1e-10)


def test_helper_M_domain():
    assert helper_M(0.0, 0.5, B3, 1.0) == 0.0
    with pytest.raises(ValueError):
        helper_M(1.0, -2.0, B3, 1.0)


def test_chebyshev_constant_integrand():
    # the weighted sum integrates f = 1 over [-1, 1] to 2 (up to O(S^-2))
    v = cheb_gauss_integrate(lambda x: np.ones_like(x), -1.0, 1.0, 400)
    assert v == pytest.approx(2.0, rel=1e-5)


def test_chebyshev_order_doubling_converges():
    f = lambda x: np.exp(-x) * x**0.5
    ref = float(mp.gammainc(1.5, 0, 3))
    e1 = abs(cheb_gauss_integrate(f, 0.0, 3.0, 100) - ref)
    e2 = abs(cheb_gauss_integrate(f, 0.0, 3.0, 200) - ref)
    assert e2 < e1 and e2 < 1e-4 * ref


def test_chebyshev_nodes_cached_and_readonly():
    q = chebyshev_nodes(16)
    assert q is chebyshev_nodes(16)
    with pytest.raises(ValueError):
        q.nodes[0] = 0.0
    with pytest.raises(ValueError):
        chebyshev_nodes(0)
    with pytest.raises(ValueError):
        cheb_gauss_integrate(np.sin, 1.0, 1.0)
