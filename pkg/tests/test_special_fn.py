import math

import numpy as np
import pytest
from scipy import integrate, special

from bessel_subordinate import special_fn as sf
from bessel_subordinate.errors import DomainError, NumericalError, RangeError


# ---------------------------------------------------------------- bessel_i

def test_bessel_i_at_origin():
    assert sf.bessel_i(0.0, 0.0) == 1.0
    assert sf.bessel_i(1.0, 0.0) == 0.0


def test_bessel_i_half_order_closed_form():
    expected = math.sqrt(2.0 / math.pi) * math.sinh(1.0)
    assert sf.bessel_i(0.5, 1.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("nu", [-0.5, -0.3, 0.0, 0.5, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("z", [0.01, 0.7, 3.0, 12.0, 40.0, 150.0])
def test_bessel_i_matches_scipy(nu, z):
    assert sf.bessel_i(nu, z) == pytest.approx(special.iv(nu, z), rel=1e-12)


def test_bessel_i_continuous_across_switch():
    for nu in (0.0, 1.5, 4.0):
        z = sf.bessel_i_switch_point(nu)
        a = sf._bessel_i_series(nu, z, scaled=True)
        b = sf._bessel_i_asymptotic(nu, z, scaled=True)
        assert a == pytest.approx(b, rel=1e-13)


def test_bessel_i_overflow_is_range_error():
    with pytest.raises(RangeError):
        sf.bessel_i(0.0, 800.0)
    assert np.isfinite(sf.bessel_i(0.0, 800.0, scaled=True))


def test_bessel_i_domain():
    with pytest.raises(DomainError):
        sf.bessel_i(-1.5, 1.0)
    with pytest.raises(DomainError):
        sf.bessel_i(0.0, -1.0)


# ---------------------------------------------------------------- bessel_k

def test_gamma_helpers_against_direct_reciprocal_gamma():
    for mu in (0.3, -0.45, 0.1):
        g1, g2 = sf._temme_gammas(mu)
        d1 = (special.rgamma(1 - mu) - special.rgamma(1 + mu)) / (2 * mu)
        d2 = 0.5 * (special.rgamma(1 - mu) + special.rgamma(1 + mu))
        assert g1 == pytest.approx(d1, rel=1e-13)
        assert g2 == pytest.approx(d2, rel=1e-14)
    g1, _ = sf._temme_gammas(0.0)
    assert g1 == pytest.approx(-np.euler_gamma, rel=1e-15)


@pytest.mark.parametrize("nu", [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.3, 10.0, 40.5])
@pytest.mark.parametrize("z", [1e-4, 0.1, 1.0, 1.99, 2.0, 5.0, 30.0, 300.0])
def test_bessel_k_matches_scipy(nu, z):
    ref = special.kv(nu, z)
    if not np.isfinite(ref) or ref == 0.0:
        pytest.skip("reference outside double range")
    assert sf.bessel_k(nu, z) == pytest.approx(ref, rel=1e-12)


def test_bessel_k_symmetry_in_order():
    for nu in (0.3, 1.0, 2.7):
        assert sf.bessel_k(-nu, 1.3) == sf.bessel_k(nu, 1.3)


def test_bessel_k_half_order_closed_form():
    assert sf.bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4) * math.exp(-2), rel=1e-14)


def test_bessel_k_small_argument_asymptotic():
    z = 1e-6
    assert z * z * sf.bessel_k(2.0, z) / 2 == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
def test_bessel_k2_decomposition(x):
    lhs = sf.bessel_k(2.0, x)
    rhs = sf.bessel_k(0.0, x) + 2.0 / x * sf.bessel_k(1.0, x)
    assert abs(lhs - rhs) < 1e-13 * lhs


def test_bessel_k_recursion_residual_property():
    for nu in (1.0, 1.5, 2.0):
        for x in np.linspace(0.1, 20.0, 60):
            kp = sf.bessel_k(nu + 1, x)
            res = kp - sf.bessel_k(nu - 1, x) - 2 * nu / x * sf.bessel_k(nu, x)
            assert abs(res) < 1e-10 * kp


def test_wronskian_property():
    for nu in (0.0, 0.5, 1.0, 2.5):
        for x in np.linspace(0.5, 10.0, 40):
            w = sf.bessel_i(nu, x) * sf.bessel_k(nu + 1, x) + sf.bessel_i(nu + 1, x) * sf.bessel_k(nu, x)
            assert w * x == pytest.approx(1.0, rel=1e-10)


def test_bessel_k_scaled_and_log_forms():
    assert sf.bessel_k(1.0, 700.0, scaled=True) == pytest.approx(special.kve(1.0, 700.0), rel=1e-12)
    # order far beyond the double range of K itself
    assert sf.log_bessel_k(300.0, 0.5) == pytest.approx(
        float(special.loggamma(300.0)) + 299 * math.log(2) - 300 * math.log(0.5), rel=1e-3)
    with pytest.raises(RangeError):
        sf.bessel_k(300.0, 0.5)
    assert sf.bessel_k(1.0, 1e4) == 0.0 or sf.bessel_k(1.0, 1e4) < 1e-300


def test_bessel_k_domain_error():
    with pytest.raises(DomainError):
        sf.bessel_k(1.0, 0.0)
    with pytest.raises(DomainError):
        sf.bessel_k(1.0, -2.0)


def test_vectorised_bessel_k():
    x = np.array([0.5, 1.0, 4.0])
    np.testing.assert_allclose(sf.bessel_k(2.0, x), special.kv(2.0, x), rtol=1e-12)


# ------------------------------------------------------------ master integral

def test_master_integral_unit_parameters():
    assert sf.master_integral(1, 1, 1, 1) == pytest.approx(2 * sf.bessel_k(1.0, 2.0), rel=1e-10)


def test_master_integral_gaussian_limit():
    assert sf.master_integral(2, 2, 1, 1e-12) == pytest.approx(0.5, rel=1e-8)


def test_master_integral_reports_both_routes():
    res = sf.master_integral_pair(3, 1, 2, 1)
    assert res.quadrature == pytest.approx(res.closed_form, rel=1e-9)
    direct = integrate.quad(lambda x: x * x * math.exp(-2 * x - 1 / x), 0, np.inf, epsrel=1e-12)[0]
    assert res.quadrature == pytest.approx(direct, rel=1e-9)


def test_master_integral_log_grid_property():
    grid = np.geomspace(0.1, 10.0, 3)
    worst = 0.0
    for nu in grid:
        for p in grid:
            for b in grid:
                for g in grid:
                    r = sf.master_integral_pair(nu, p, b, g)
                    worst = max(worst, abs(r.quadrature - r.closed_form) / r.closed_form)
    assert worst < 1e-8


def test_master_integral_domain():
    with pytest.raises(DomainError):
        sf.master_integral(1, 1, 0, 1)


def test_quadrature_config_invariants():
    with pytest.raises(ValueError):
        sf.QuadratureConfig(rel_tol=0)
    with pytest.raises(ValueError):
        sf.QuadratureConfig(max_subdivisions=8)
    cfg = sf.QuadratureConfig()
    with pytest.raises(Exception):
        cfg.rel_tol = 1e-3


def test_quad_raises_with_estimate():
    cfg = sf.QuadratureConfig(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=16)
    with pytest.raises(NumericalError) as info:
        sf.quad(lambda x: math.sin(1 / x) / x, 1e-6, 1.0, cfg)
    assert info.value.estimate is not None


# ------------------------------------------------------------ Mittag-Leffler

def test_mittag_leffler_reduces_to_exponential():
    for z in (-3.0, -0.5, 0.0, 1.2):
        assert sf.mittag_leffler(1.0, 1.0, z) == pytest.approx(math.exp(z), rel=1e-13)


def test_mittag_leffler_alpha_half_erfc():
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    for x in (0.2, 1.0, 2.5, 6.0):
        assert sf.mittag_leffler(0.5, 1.0, -x) == pytest.approx(special.erfcx(x), rel=1e-10)


def test_mittag_leffler_zero_argument():
    assert sf.mittag_leffler_e1nu(1.0, 0.0) == 1.0
    assert sf.mittag_leffler_e1nu(0.5, 0.0) == 1.0
    assert sf.mittag_leffler(1.0, 0.5, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)


def test_mittag_leffler_matches_lamperti_integral():
    nu = 0.5
    lam, t = 1.0, 1.0
    dens = lambda x: math.sin(math.pi * nu) / math.pi * x ** (nu - 1) / (
        x ** (2 * nu) + 1 + 2 * x ** nu * math.cos(math.pi * nu))
    val = integrate.quad(lambda x: math.exp(-lam ** (1 / nu) * t * x) * dens(x), 0, np.inf, epsrel=1e-12)[0]
    assert sf.mittag_leffler_e1nu(nu, -lam * t ** nu) == pytest.approx(val, abs=1e-9)
    # the series with Gamma(k + nu) in the denominator is a different function
    assert abs(sf.mittag_leffler(1.0, nu, -lam * t ** nu) - val) > 1e-2


def test_mittag_leffler_large_negative_argument():
    val = sf.mittag_leffler(0.3, 1.0, -40.0)
    nu = 0.3
    dens = lambda x: math.sin(math.pi * nu) / math.pi * x ** (nu - 1) / (
        x ** (2 * nu) + 1 + 2 * x ** nu * math.cos(math.pi * nu))
    s = 40.0 ** (1 / nu)
    ref = integrate.quad(lambda u: math.exp(-u) * dens(u / s) / s, 0, np.inf, epsrel=1e-12, limit=400)[0]
    assert val == pytest.approx(ref, rel=1e-8)
    # leading algebraic decay -z^-1 / Gamma(1 - alpha)
    assert val == pytest.approx(1 / (40.0 * math.gamma(1 - nu)), rel=0.05)


def test_mittag_leffler_unreachable_argument_raises():
    with pytest.raises(NumericalError):
        sf.mittag_leffler(0.3, 0.7, -200.0)
