"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

Every test prints a single PASS/FAIL line (collected in the terminal
summary).  Criterion 7 is known not to hold as stated and is marked as a
strict expected failure; see its docstring.
"""

import itertools
import time

import numpy as np
import pytest

from bessel_subordinate import densities as d
from bessel_subordinate import mc_harness as mc
from bessel_subordinate import mellin_fox as mf
from bessel_subordinate import pde_verify as pv
from bessel_subordinate import suites as su
from bessel_subordinate.samplers import ProcessSpec, sample

SEED = 20261016


def test_criterion_01_normalization(criterion):
    t0 = time.perf_counter()
    recs = su.normalization_records()
    secs = time.perf_counter() - t0
    worst = max(recs, key=lambda r: r.detail["error"])
    bad = [r.name for r in recs if not r.passed]
    ok = not bad and len(recs) >= 14 and secs < 60
    criterion(1, ok, f"{len(recs)} densities, worst |mass-1| = {worst.detail['error']:.1e} ({worst.name}), "
                     f"{secs:.0f} s" + (f", failing: {bad}" if bad else ""))
    assert ok


def test_criterion_02_master_integral(criterion):
    t0 = time.perf_counter()
    rec = su.master_integral_record()
    secs = time.perf_counter() - t0
    ok = rec.passed and rec.detail["points"] == 81 and secs < 10
    criterion(2, ok, f"81 points, worst relative error {rec.value:.1e} (tol 1e-8), {secs:.1f} s")
    assert ok


def test_criterion_03_fox_equivalence(criterion):
    t0 = time.perf_counter()
    rec = su.fox_record()
    secs = time.perf_counter() - t0
    ok = rec.passed and rec.detail["points"] == 60 and secs < 120
    criterion(3, ok, f"60 (gamma, t, r) points, worst |fox - quadrature| {rec.value:.1e} (tol 1e-6), {secs:.1f} s")
    assert ok


def test_criterion_04_moments(criterion):
    t0 = time.perf_counter()
    zs = {}
    for m, g in itertools.product((1, 2), (1.0, 2.0, 3.0)):
        b = sample(ProcessSpec("IteratedBessel", gamma=g, t=1.0), 1_000_000, SEED)
        zs[(m, g)] = mc.moment_estimate(b, m).z_score(mf.iterated_bessel_moment(m, g, 1.0))
    half = mc.check_bessel_at_passage_moment(SEED)
    secs = time.perf_counter() - t0
    worst = max(abs(z) for z in zs.values())
    ok = worst < 3 and half.passed and secs < 90
    criterion(4, ok, f"iterated Bessel moments worst |z| = {worst:.2f}; E R(T_1)^(1/2) at gamma 2 "
                     f"z = {half.detail['z']:.2f} (infinite variance, standard error indicative); {secs:.0f} s")
    assert ok


def test_criterion_05_distributional_identities(criterion):
    t0 = time.perf_counter()
    checks = [
        mc.check_composition_swap(SEED, gamma=2.0),
        mc.check_composition_swap(SEED, gamma=3.0, t=0.7),
        mc.check_passage_of_bessel(SEED, gamma=2.0),
        mc.check_passage_of_bessel_one(SEED),
        mc.check_stable_ratio_lamperti(SEED),
        mc.check_stable_half_is_passage(SEED),
    ]
    secs = time.perf_counter() - t0
    ok = all(c.passed and c.detail["n"] == 100_000 for c in checks) and secs < 120
    ps = ", ".join(f"{c.name} {c.detail['p_value']:.2f}" for c in checks)
    criterion(5, ok, f"two-sample KS p-values: {ps}; {secs:.0f} s")
    assert ok


def test_criterion_06_special_cases(criterion):
    recs = su.reduction_records()
    ok = all(r.passed for r in recs)
    criterion(6, ok, ", ".join(f"{r.name} {r.value:.1e}" for r in recs) + " (tol 1e-10)")
    assert ok


def _pde_reports():
    reps = []
    for g in (1.5, 2.0, 3.0):
        reps.append(("iterated Bessel, uncorrected operator", pv.verify_iterated_bessel_pde(g, variant="uncorrected")))
    for g in (1.0, 1.5, 2.0, 3.0):
        reps.append(("third-order, with zeroth-order term", pv.verify_jr_pde(g)))
    for g in (1.0, 2.0, 3.0):
        reps.append(("R(T_t) Laplace-type", pv.verify_laplace_type_pde("bessel_at_fpt", g)))
    fpt, comp = pv.verify_drift_pdes()
    reps += [("drifted passage", fpt), ("drifted composite", comp)]
    reps += [(f"n-fold passage n={n}", pv.verify_iterated_fpt_pde(n)) for n in (1, 2)]
    reps.append(("half-plane forward", pv.verify_p2_forward_pde()))
    reps.append(("J2 Laplace-type", pv.verify_laplace_type_pde("hypJ2")))
    reps.append(("J3 Laplace-type", pv.verify_laplace_type_pde("hypJ3")))
    return reps


@pytest.mark.xfail(strict=True, reason="the uncorrected inner factor of the iterated Bessel operator does not "
                                       "annihilate the density for gamma != 1")
def test_criterion_07_pde_residuals(criterion):
    """Every governing equation as stated, plus the swapped-order control.

    The fourth-order iterated Bessel equation fails for gamma > 1.  Its
    inner factor has Mellin symbol x^2 + (2-g)x + (g-1)(3-2g) with
    x = eta - 4, while the density requires (x + g - 1)(x + 2g - 1).  The
    residual stalls at O(1) under refinement.  The inner factor
    d^2 - 3(g-1)/r d + (g-1)(2g-1)/r^2 converges at order 2 (checked in
    ``test_criterion_07_corrected_operator_converges``).
    """
    t0 = time.perf_counter()
    reps = _pde_reports()
    control = pv.verify_iterated_bessel_pde(2.0, variant="swapped")
    secs = time.perf_counter() - t0
    failing = [f"{label} gamma={rep.notes.get('gamma')} (max {rep.norms[0]:.2f}, slope {rep.convergence_slope:.2f})"
               for label, rep in reps if not rep.passed]
    slopes = [rep.convergence_slope for _, rep in reps if rep.passed]
    ok = not failing and not control.passed and secs < 600
    criterion(7, ok, f"{len(reps) - len(failing)}/{len(reps)} equations converge (slopes "
                     f"{min(slopes):.2f}-{max(slopes):.2f}); swapped control fails: {not control.passed}; "
                     f"{secs:.0f} s; failing: {'; '.join(failing) or 'none'}; corrected inner factor "
                     f"d^2 - 3(g-1)/r d + (g-1)(2g-1)/r^2 converges at order 2")
    assert ok


def test_criterion_07_corrected_operator_converges():
    for g in (1.5, 2.0, 3.0):
        rep = pv.verify_iterated_bessel_pde(g, variant="corrected")
        assert rep.passed and rep.convergence_slope >= 1.5
    assert not pv.negative_control(2.0).passed


def test_criterion_08_iterated_passage_laplace(criterion):
    t0 = time.perf_counter()
    zs = {}
    for n in (1, 2, 3):
        v = sample(ProcessSpec("IteratedFPT", depth=n, t=1.0), 1_000_000, SEED).values
        for lam in (0.5, 1.0, 2.0):
            est = mc.mean_estimate(np.exp(-lam * v))
            zs[(n, lam)] = est.z_score(d.iterated_fpt_laplace(n, lam, 1.0))
    secs = time.perf_counter() - t0
    worst = max(zs, key=lambda k: abs(zs[k]))
    ok = all(abs(z) < 3 for z in zs.values()) and secs < 60
    criterion(8, ok, f"9 (n, lambda) pairs, worst |z| = {abs(zs[worst]):.2f} at n={worst[0]}, "
                     f"lambda={worst[1]}; {secs:.0f} s")
    assert ok


def test_criterion_09_hyperbolic(criterion):
    t0 = time.perf_counter()
    j2, j3, probe = su.hyperbolic_oracle_records()
    sinh = [mc.check_sinh_ratio(SEED, t=t) for t in (0.5, 1.0)]
    secs = time.perf_counter() - t0
    ok = j2.passed and j3.passed and probe.passed and all(s.passed for s in sinh) and secs < 120
    other = ", ".join(f"{m:.4f}" for m in probe.detail["masses_other"].values())
    criterion(9, ok, f"J2 dual routes {j2.value:.1e}, J3 dual routes {j3.value:.1e} (tol 1e-6); "
                     f"sinh ratio z = {sinh[0].detail['z']:.2f}, {sinh[1].detail['z']:.2f}; convention probe "
                     f"verdict {probe.detail['verdict']} (unit mass within {probe.value:.0e}; the other display has "
                     f"masses {other}); {secs:.0f} s")
    assert ok


def test_criterion_10_drifted_passage(criterion):
    t0 = time.perf_counter()
    mean = mc.check_drifted_mean(SEED)
    lap = mc.check_drifted_laplace(SEED)
    lim = su.drift_limit_record()
    secs = time.perf_counter() - t0
    ok = mean.passed and lap.passed and lim.passed and secs < 60
    criterion(10, ok, f"mean z = {mean.detail['z']:.2f}, Laplace z = {lap.detail['z']:.2f}, "
                      f"mu -> 0 limit {lim.value:.1e} (tol 1e-5); {secs:.0f} s")
    assert ok


def test_criterion_11_mittag_leffler(criterion):
    t0 = time.perf_counter()
    ml = su.mittag_leffler_record()
    ident = su.identity_integral_record()
    secs = time.perf_counter() - t0
    ok = ml.passed and ident.passed and len(su.IDENTITY_PAIRS) == 6 and secs < 30
    criterion(11, ok, f"Mittag-Leffler relation {ml.value:.1e} (tol 1e-6), integral identity {ident.value:.1e} "
                      f"(tol 1e-8); {secs:.1f} s")
    assert ok
