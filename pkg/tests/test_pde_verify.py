import math

import numpy as np
import pytest

from bessel_subordinate import densities as d
from bessel_subordinate import pde_verify as pv
from bessel_subordinate.errors import DomainError, UnsupportedParameterError
from bessel_subordinate.pde_verify import D, D2, GridSpec, Op, r_power


def poly_derivs(coeffs, r):
    """{k: p^(k)(r)} for k = 0..4, p given low order first."""
    p = np.polynomial.Polynomial(coeffs)
    return {k: float(p.deriv(k)(r)) if k else float(p(r)) for k in range(5)}


# ------------------------------------------------------------ operator algebra

def test_laurent_algebra():
    c = r_power(-1, 2.0) * r_power(3) + 1.0
    assert c(2.0) == pytest.approx(2 * 4 + 1)
    assert c.deriv()(2.0) == pytest.approx(8.0)
    assert (r_power(-2).deriv().deriv())(1.5) == pytest.approx(6 / 1.5 ** 4)


def test_composition_is_leibniz():
    # d (1/r) f = f'/r - f/r^2
    op = D @ Op.mul(r_power(-1))
    r = 1.3
    f = poly_derivs([1, 2, 3], r)
    assert op.apply_exact(f, r) == pytest.approx(f[1] / r - f[0] / r ** 2, abs=1e-14)


def test_factor_order_matters():
    a = Op.mul(r_power(-1)) @ D
    b = D @ Op.mul(r_power(-1))
    f = poly_derivs([0, 0, 1], 2.0)
    assert a.apply_exact(f, 2.0) != pytest.approx(b.apply_exact(f, 2.0))


def test_stencils_need_order_at_most_four():
    with pytest.raises(UnsupportedParameterError):
        Op.d(5).apply(lambda x: x, 1.0, 0.1)


# ------------------------------------------------------------ manufactured solutions

OPERATORS = {
    "iterated_uncorrected": pv.iterated_bessel_operator(2.0, "uncorrected"),
    "iterated_corrected": pv.iterated_bessel_operator(2.5, "corrected"),
    "iterated_swapped": pv.iterated_bessel_operator(3.0, "swapped"),
    "reduced": pv.reduced_three_halves(),
    "jr": pv.jr_operator(1.5),
    "jr_plain": pv.jr_operator(2.0, with_potential=False),
    "bessel_forward": pv.bessel_forward(3.0),
    "hyp2": pv.hyperbolic_operator(1.0),
    "hyp3": pv.hyperbolic_operator(2.0),
}


@pytest.mark.parametrize("name", list(OPERATORS))
def test_stencil_matches_exact_application_on_quadratic(name):
    # centered stencils are exact on quadratics at any step; a coarse step keeps h^-4 rounding out
    op = OPERATORS[name]
    t = 0.7
    for r in (0.9, 1.4, 2.2):
        exact = op.apply_exact(poly_derivs([0, 0, t], r), r)
        stencil = op.apply(lambda x: t * x ** 2, r, 0.25)
        assert abs(exact - stencil) < 1e-10


def test_hand_values_at_gamma_two():
    # worked by hand on q = r^2: uncorrected 3/r^2, swapped -1/r^2, corrected -1/r^2
    r = 1.7
    f = poly_derivs([0, 0, 1], r)
    assert pv.iterated_bessel_operator(2.0, "uncorrected").apply_exact(f, r) == pytest.approx(3 / r ** 2)
    assert pv.iterated_bessel_operator(2.0, "swapped").apply_exact(f, r) == pytest.approx(-1 / r ** 2)
    assert pv.iterated_bessel_operator(2.0, "corrected").apply_exact(f, r) == pytest.approx(-1 / r ** 2)


def test_jr_hand_value_on_cubic():
    g, r = 2.5, 1.2
    hand = 6 * r + 2 * (2 - g) * 6 * r + (g - 1) ** 2 * 3 * r - (g - 1) ** 2 * r
    assert pv.jr_operator(g).apply_exact(poly_derivs([0, 0, 0, 1], r), r) == pytest.approx(hand, abs=1e-12)


def test_hyperbolic_hand_value_on_linear():
    # (d^2 - c d coth) applied to eta t is -c t (coth + eta (1 - coth^2))
    e, t, c = 0.8, 1.3, 2.0
    coth = 1 / math.tanh(e)
    hand = -c * t * (coth + e * (1 - coth ** 2))
    assert pv.hyperbolic_operator(c).apply(lambda x: t * x, e, 0.05) == pytest.approx(hand, abs=1e-10)


def test_three_halves_reduced_form_agrees():
    plain = pv.iterated_bessel_operator(1.5, "uncorrected")
    reduced = pv.reduced_three_halves()
    coeffs = [0.3, -1.0, 2.0, 0.5, -0.25]
    for r in (0.7, 1.0, 2.5):
        f = poly_derivs(coeffs, r)
        assert plain.apply_exact(f, r) == pytest.approx(reduced.apply_exact(f, r), abs=1e-12)


def test_unknown_variant():
    with pytest.raises(DomainError):
        pv.iterated_bessel_operator(2.0, "mirror")


# ------------------------------------------------------------ grids and reports

def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec(0.0, 1.0, 0.5, 1.0, 0.1, 0.1)
    with pytest.raises(DomainError):
        GridSpec(0.5, 1.0, 0.5, 1.0, 0.1, 0.1, refinement_levels=1)
    with pytest.raises(DomainError):
        GridSpec(2.0, 1.0, 0.5, 1.0, 0.1, 0.1)
    with pytest.raises(DomainError):
        pv.verify_jr_pde(2.0, GridSpec(0.1, 1.0, 0.5, 1.0, 0.1, 0.01))


def test_grid_steps_halve():
    g = GridSpec(1.0, 2.0, 1.0, 2.0, 0.1, 0.2, refinement_levels=3)
    assert g.steps() == [(0.1, 0.2), (0.05, 0.1), (0.025, 0.05)]


def test_convergence_fit_recovers_order():
    steps = [(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)]
    slope, fit = pv.convergence_fit(steps, [3 * s[0] ** 2 for s in steps])
    assert slope == pytest.approx(2.0) and fit < 1e-12


def test_exact_residual_passes_as_floor():
    grid = GridSpec(1.0, 2.0, 1.0, 2.0, 0.1, 0.1)
    rep = pv._report("x", "zero", grid, lambda r, t, hr, ht: 0.0)
    assert rep.exact_to_rounding and rep.passed
    assert rep.as_dict()["passed"] is True


# ------------------------------------------------------------ iterated Bessel

def test_gamma_one_fourth_order_equation():
    rep = pv.verify_iterated_bessel_pde(1.0)
    assert rep.passed and rep.convergence_slope == pytest.approx(2.0, abs=0.3)


@pytest.mark.parametrize("gamma", [1.5, 2.0, 3.0])
def test_corrected_operator_converges(gamma):
    rep = pv.verify_iterated_bessel_pde(gamma, variant="corrected")
    assert rep.passed
    assert 1.7 <= rep.convergence_slope <= 2.3


@pytest.mark.parametrize("gamma", [1.5, 2.0, 3.0])
def test_uncorrected_inner_factor_does_not_hold(gamma):
    # the residual stalls at O(1) instead of shrinking with the step
    rep = pv.verify_iterated_bessel_pde(gamma, variant="uncorrected")
    assert not rep.passed
    assert rep.norms[0] > 0.1 and abs(rep.convergence_slope) < 0.2


def test_swapped_factor_order_fails():
    assert not pv.verify_iterated_bessel_pde(2.0, variant="swapped").passed
    assert not pv.negative_control(2.0).passed


@pytest.mark.slow
def test_corrected_operator_on_quadrature_density():
    grid = GridSpec(1.0, 2.0, 0.9, 1.1, 0.05, 0.02, 3, points_r=2, points_t=1)
    rep = pv.verify_iterated_bessel_pde(2.0, grid, variant="corrected", method="quadrature")
    assert rep.passed


# ------------------------------------------------------------ third-order equation

@pytest.mark.parametrize("gamma", [1.0, 1.5, 2.0, 3.0])
def test_jr_with_zeroth_order_term(gamma):
    rep = pv.verify_jr_pde(gamma)
    assert rep.passed


def test_jr_gamma_two_slope():
    assert 1.7 <= pv.verify_jr_pde(2.0).convergence_slope <= 2.3


def test_jr_without_zeroth_order_term_only_at_gamma_one():
    assert pv.verify_jr_pde(1.0, with_potential=False).passed
    for g in (1.5, 2.0, 3.0):
        assert not pv.verify_jr_pde(g, with_potential=False).passed


# ------------------------------------------------------------ Laplace-type equations

def test_cauchy_kernel_is_harmonic():
    rep = pv.verify_laplace_type_pde("bessel_at_fpt", 1.0)
    assert rep.passed
    r, t = 0.8, 1.1
    assert d.bessel_at_fpt_density(1.0, r, t) == pytest.approx(2 * t / (math.pi * (t * t + r * r)))


@pytest.mark.parametrize("law,param", [("bessel_at_fpt", 3.0), ("hypJ2", None), ("hypJ3", None)])
def test_laplace_type(law, param):
    assert pv.verify_laplace_type_pde(law, param).passed


def test_hyperbolic_whole_convention_doubles_the_operator():
    assert pv.verify_laplace_type_pde("hypJ3", convention="whole").passed


def test_laplace_type_rejects_unknown_law():
    with pytest.raises(DomainError):
        pv.verify_laplace_type_pde("fpt")
    with pytest.raises(DomainError):
        pv.verify_laplace_type_pde("bessel_at_fpt")


# ------------------------------------------------------------ drift

def test_drift_equations():
    reps = pv.verify_drift_pdes()
    assert [r.law for r in reps] == ["drifted_fpt", "drifted_composite"]
    assert all(r.passed for r in reps)


def test_zero_drift_composite_reduces_to_laplace_type():
    # with mu -> 0 the time operator 2 mu d_t - d_t^2 loses its first-order part
    for r, t in [(0.5, 1.0), (1.5, 0.7)]:
        assert d.drifted_composite_density(2.0, 1e-9, r, t) == pytest.approx(
            d.bessel_at_fpt_density(2.0, r, t), rel=1e-6)
    with pytest.raises(DomainError):
        pv.verify_drift_pdes(mu=0.0)


# ------------------------------------------------------------ iterated passage times

@pytest.mark.parametrize("n", [1, 2])
def test_iterated_passage_equation(n):
    rep = pv.verify_iterated_fpt_pde(n)
    assert rep.passed


def test_iterated_passage_equation_needs_density():
    with pytest.raises(UnsupportedParameterError):
        pv.verify_iterated_fpt_pde(3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_laplace_domain_ode(n, lam):
    assert pv.verify_iterated_fpt_laplace(n, lam) < 1e-9


def test_laplace_exponent_arithmetic():
    assert (2 ** (7 / 8)) ** 8 == pytest.approx(2 ** 7, rel=1e-15)
    with pytest.raises(UnsupportedParameterError):
        pv.verify_iterated_fpt_laplace(5)


# ------------------------------------------------------------ hyperbolic forward equations

def test_p2_forward_equation():
    assert pv.verify_p2_forward_pde().passed


def test_p3_forward_equation():
    assert pv.verify_p3_forward_pde().passed
    assert pv.verify_p3_forward_pde(convention="whole").passed


def test_p3_with_coth_over_eta_drift_fails():
    assert not pv.verify_p3_forward_pde(drift="coth_over_eta").passed
