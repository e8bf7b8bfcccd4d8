"""Named verification suites assembled from the oracle, PDE and Monte Carlo checks.

Every suite returns a list of ``CheckResult`` records.  Records marked
``informational`` are reported but do not count as failures.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np

from . import densities as d
from . import hyperbolic as h
from . import mc_harness as mc
from . import mellin_fox as mf
from . import pde_verify as pv
from . import special_fn as sf
from .errors import DomainError
from .mc_harness import CheckResult
from .registry import law

DEFAULT_PARAMS = {
    "bessel_transition": dict(gamma=3, x=0.5, t=1),
    "iterated_bessel": dict(gamma=2, t=1),
    "jr": dict(gamma=2, t=1),
    "bessel_at_fpt": dict(gamma=3, t=1),
    "hat_r": dict(gamma=3, t=2),
    "beta_arcsin": dict(gamma=3, t=2),
    "inverse_bessel_at_fpt": dict(gamma=3, t=1),
    "inverted_composition": dict(gamma=2.5, t=0.7),
    "stable_ratio": dict(nu=0.5),
    "fpt": dict(t=1),
    "drifted_fpt": dict(t=1, mu=1),
    "drifted_composite": dict(gamma=2, mu=1, t=1),
    "iterated_fpt": dict(n=2, t=1),
    "cauchy_at_stable": dict(nu=0.5, t=1),
    "hyp2": dict(t=1),
    "hyp3": dict(t=1),
    "hypJ2": dict(t=1),
    "hypJ3": dict(t=1),
}


def _abs_check(name, anchor, value, reference, tol, **detail) -> CheckResult:
    err = abs(value - reference)
    return CheckResult(name, anchor, bool(err <= tol), float(value), float(reference), f"abs <= {tol:g}",
                       dict(error=float(err), **detail))


def _max_check(name, anchor, worst, tol, **detail) -> CheckResult:
    return CheckResult(name, anchor, bool(worst <= tol), float(worst), 0.0, f"max <= {tol:g}", dict(detail))


# ------------------------------------------------------------ normalization

def normalization_records(seed: int | None = None) -> list[CheckResult]:
    out = []
    for law_id, params in DEFAULT_PARAMS.items():
        t0 = time.perf_counter()
        f = law(law_id, **params)
        tol = 1e-5 if f.nested else 1e-6
        out.append(_abs_check(f"normalization_{law_id}", f"{law_id} density has unit mass",
                              f.normalization(), 1.0, tol, params=params,
                              seconds=time.perf_counter() - t0))
    return out


# ------------------------------------------------------------ oracles

MASTER_GRID = np.geomspace(0.1, 10.0, 3)


def master_integral_record() -> CheckResult:
    worst = 0.0
    for nu, p, b, g in itertools.product(MASTER_GRID, repeat=4):
        r = sf.master_integral_pair(nu, p, b, g)
        worst = max(worst, abs(r.quadrature - r.closed_form) / r.closed_form)
    return _max_check("master_integral", "x^(nu-1) exp(-beta x^p - gamma x^-p) integral in closed K form",
                      worst, 1e-8, points=len(MASTER_GRID) ** 4, measure="relative")


FOX_GAMMAS = (1.0, 2.0, 3.0, 5.5)
FOX_TIMES = (0.25, 1.0, 4.0)
FOX_RADII = (0.1, 0.5, 1.0, 2.0, 5.0)


def fox_record() -> CheckResult:
    worst = 0.0
    for g, t in itertools.product(FOX_GAMMAS, FOX_TIMES):
        fox = mf.iterated_bessel_fox_density(g, np.array(FOX_RADII), t)
        quad = np.array([d.iterated_bessel_quadrature(g, r, t) for r in FOX_RADII])
        worst = max(worst, float(np.max(np.abs(fox - quad))))
    n = len(FOX_GAMMAS) * len(FOX_TIMES) * len(FOX_RADII)
    return _max_check("fox_vs_quadrature", "iterated Bessel density as a Fox H function", worst, 1e-6, points=n)


def reduction_records() -> list[CheckResult]:
    pts = [(0.3, 1.0), (1.0, 1.0), (2.0, 0.5), (7.0, 3.0)]
    cauchy = max(abs(d.bessel_at_fpt_density(1.0, r, t) - 2 * t / (math.pi * (t * t + r * r))) for r, t in pts)
    student = max(abs(d.inverse_bessel_at_fpt_density(float(n), r, 1 / math.sqrt(n))
                      - d.folded_student_t_density(n, r))
                  for n in (1, 2, 3, 5) for r in (0.0, 0.4, 1.0, 3.0))
    arcsin = max(abs(d.beta_arcsin_density(1.0, r, 1.0) - 1 / (math.pi * math.sqrt(r * (1 - r))))
                 for r in (0.05, 0.3, 0.5, 0.9))
    tails = max(abs(d.bessel_at_fpt_tail(g, r, t) - float(d.bessel_at_fpt_sf(g, r, t)))
                for g in (2, 3, 4) for r in (0.1, 1.0, 3.0, 20.0) for t in (0.5, 1.0, 2.0))
    return [
        _max_check("folded_cauchy_reduction", "gamma = 1 composite is folded Cauchy", cauchy, 1e-10),
        _max_check("student_reduction", "inverse law at gamma = n, t = 1/sqrt(n) is folded Student t", student,
                   1e-10),
        _max_check("arcsin_reduction", "gamma = 1 beta law is the arcsine law", arcsin, 1e-10),
        _max_check("explicit_tails", "explicit tails of R(T_t) for gamma = 2, 3, 4", tails, 1e-10),
    ]


HYP_ETAS = (0.1, 0.5, 1.0, 2.0, 5.0)


def hyperbolic_oracle_records() -> list[CheckResult]:
    j2 = max(abs(h.pj2_density(e, 1.0) - h.pj2_subordination(e, 1.0)) for e in HYP_ETAS)
    j3 = max(abs(float(h.pj3_density(e, 1.0)) - h.pj3_subordination(e, 1.0)) for e in HYP_ETAS)
    probe = h.j3_convention_probe()
    masses = probe["mass_eta2_plus_2t2"]
    worst = max(abs(m - 1) for m in masses.values())
    return [
        _max_check("hypJ2_dual_routes", "half-plane law at T_t: closed form vs subordination", j2, 1e-6),
        _max_check("hypJ3_dual_routes", "half-space law at T_t: closed form vs subordination", j3, 1e-6),
        CheckResult("hypJ3_convention_probe", "half-space law at T_t: which display has unit mass",
                    probe["verdict"] != "undecided" and worst < 1e-6, worst, 0.0, "unit mass within 1e-6",
                    dict(verdict=probe["verdict"], masses_selected=masses,
                         masses_other=probe["mass_eta2_plus_t2"])),
    ]


def drift_limit_record() -> CheckResult:
    worst = max(abs(d.drifted_composite_density(2.0, 1e-8, r, t) - d.bessel_at_fpt_density(2.0, r, t))
                for r, t in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.7)])
    return _max_check("zero_drift_limit", "R(T^mu_t) tends to R(T_t) as mu -> 0", worst, 1e-5)


def mittag_leffler_record() -> CheckResult:
    worst = max(abs(d.mittag_leffler_integral(nu, 1.0, t) - sf.mittag_leffler_e1nu(nu, -t ** nu))
                for nu in (0.3, 0.5, 0.7) for t in (0.5, 1.0))
    return _max_check("mittag_leffler", "Laplace transform of the stable ratio law is E_nu", worst, 1e-6)


IDENTITY_PAIRS = [(1, 1), (2, 1), (3, 0.5), (2.5, 2.0), (0.5, 0.3), (4, 1.7)]


def identity_integral_record() -> CheckResult:
    worst = max(abs(d.identity_integral_check(g, t)) for g, t in IDENTITY_PAIRS)
    return _max_check("identity_integral", "integral identity from the moment calculation", worst, 1e-8)


def laplace_ode_record() -> CheckResult:
    worst = max(pv.verify_iterated_fpt_laplace(n, lam) for n in (1, 2, 3, 4) for lam in (0.5, 1.0, 2.0))
    return _max_check("iterated_passage_laplace_ode", "Laplace-domain ODE of the n-fold passage time",
                      worst, 1e-9, measure="relative")


def oracle_records(seed: int | None = None) -> list[CheckResult]:
    return [master_integral_record(), fox_record(), *reduction_records(), *hyperbolic_oracle_records(),
            drift_limit_record(), mittag_leffler_record(), identity_integral_record(), laplace_ode_record()]


# ------------------------------------------------------------ PDE residuals

# variants known not to hold; reported so the verdict stays visible
_INFORMATIONAL = {
    ("iterated_bessel", "uncorrected"): "uncorrected inner factor; its Mellin symbol does not match the density for gamma != 1",
    ("jr", False): "display without the zeroth-order term; holds only at gamma = 1",
    ("hyp3", "coth_over_eta"): "drift coth(eta)/eta in place of coth(eta)",
}


def _pde_record(rep: pv.ResidualReport, anchor: str, informational: str | None = None,
                expect_fail: bool = False) -> CheckResult:
    detail = rep.as_dict()
    detail.pop("passed")
    if informational:
        detail["note"] = informational
    passed = (not rep.passed) if expect_fail else rep.passed
    tag = ",".join(f"{k}={v}" for k, v in rep.notes.items() if v is not None)
    return CheckResult(f"pde_{rep.law}[{tag}]" if tag else f"pde_{rep.law}", anchor, bool(passed), rep.norms[0], 0.0,
                       "negative control must fail" if expect_fail else
                       f"slope >= {pv.PASS_SLOPE} and max < {pv.PASS_MAX:g}",
                       detail, informational=bool(informational))


def pde_records(seed: int | None = None, law_id: str | None = None, gamma: float | None = None) -> list[CheckResult]:
    """Residual reports; ``law_id`` and ``gamma`` restrict the run to one equation."""
    out = []
    want = lambda name: law_id is None or law_id == name
    gammas = lambda default: (gamma,) if gamma is not None else default

    if want("iterated_bessel"):
        anchor = "fourth-order equation of the iterated Bessel density"
        for g in gammas((1.5, 2.0, 3.0)):
            out.append(_pde_record(pv.verify_iterated_bessel_pde(g, variant="corrected"), anchor))
            out.append(_pde_record(pv.verify_iterated_bessel_pde(g, variant="uncorrected"), anchor,
                                   _INFORMATIONAL[("iterated_bessel", "uncorrected")]))
        if gamma is None:
            out.append(_pde_record(pv.verify_iterated_bessel_pde(1.0), "iterated Brownian motion equation"))
            out.append(_pde_record(pv.negative_control(2.0), "swapped factor order", expect_fail=True))
    if want("jr"):
        anchor = "third-order equation of R(t^2)"
        for g in gammas((1.0, 2.0, 3.0)):
            rep = pv.verify_jr_pde(g)
            out.append(_pde_record(rep, anchor))
            plain = pv.verify_jr_pde(g, with_potential=False)
            note = None if g == 1 else _INFORMATIONAL[("jr", False)]
            out.append(_pde_record(plain, anchor, note))
    if want("bessel_at_fpt"):
        for g in gammas((1.0, 3.0)):
            out.append(_pde_record(pv.verify_laplace_type_pde("bessel_at_fpt", g),
                                   "R(T_t) solves a Laplace-type equation in (r, t)"))
    for name, anchor in (("hypJ2", "half-plane distance at T_t, Laplace-type equation"),
                         ("hypJ3", "half-space distance at T_t, Laplace-type equation")):
        if want(name):
            out.append(_pde_record(pv.verify_laplace_type_pde(name), anchor))
    if want("drifted_fpt") or want("drifted_composite"):
        fpt, comp = pv.verify_drift_pdes()
        if want("drifted_fpt"):
            out.append(_pde_record(fpt, "drifted passage density equation in (beta, t)"))
        if want("drifted_composite"):
            out.append(_pde_record(comp, "R(T^mu_t) equation with drifted clock"))
    if want("iterated_fpt"):
        for n in (1, 2):
            out.append(_pde_record(pv.verify_iterated_fpt_pde(n), "n-fold passage time equation"))
    if want("hyp2"):
        out.append(_pde_record(pv.verify_p2_forward_pde(), "half-plane distance forward equation"))
    if want("hyp3"):
        out.append(_pde_record(pv.verify_p3_forward_pde(), "half-space distance forward equation"))
        out.append(_pde_record(pv.verify_p3_forward_pde(drift="coth_over_eta"),
                               "half-space distance forward equation", _INFORMATIONAL[("hyp3", "coth_over_eta")]))
    if not out:
        raise DomainError(f"no governing equation registered for {law_id!r}")
    return out


# ------------------------------------------------------------ Monte Carlo

def _tag(rec: CheckResult, **kw) -> CheckResult:
    rec.name += "[" + ",".join(f"{k}={v}" for k, v in kw.items()) + "]"
    return rec


def identity_records(seed: int) -> list[CheckResult]:
    out = [
        mc.check_composition_swap(seed),
        mc.check_passage_of_bessel_one(seed),
        _tag(mc.check_passage_of_bessel(seed, gamma=2.0), gamma=2.0),
        _tag(mc.check_passage_of_bessel(seed, gamma=3.0, t=0.5), gamma=3.0, t=0.5),
        mc.check_stable_ratio_lamperti(seed),
        mc.check_stable_half_is_passage(seed),
        mc.check_folded_cauchy(seed),
        mc.check_passage_scaling(seed),
        mc.check_iterated_passage_law(seed),
        _tag(mc.check_sinh_ratio(seed, t=1.0), t=1.0),
    ]
    for nu in (0.3, 0.7):
        out.append(_tag(mc.check_stable_ratio_law(seed, nu=nu), nu=nu))
    for which in ("hyp2", "hyp3", "hypJ2", "hypJ3"):
        out.append(mc.check_hyperbolic_law(seed, which=which))
    for which in ("beta_arcsin", "inverse_bessel_at_fpt", "hat_r"):
        out.append(mc.check_pushforward(seed, which=which))
    for which in ("inverted_composition", "jr", "bessel_at_fpt", "cauchy_at_stable"):
        out.append(mc.check_composite_law(seed, which=which))
    out.append(mc.check_p2_bessel_expectation(seed, n=200_000))
    return out


def moment_records(seed: int) -> list[CheckResult]:
    out = []
    for m, g in itertools.product((1, 2), (1.0, 2.0, 3.0)):
        out.append(_tag(mc.check_iterated_bessel_moment(seed, m=m, gamma=g), m=m, gamma=g))
    out.append(mc.check_bessel_at_passage_moment(seed))
    out.append(mc.check_drifted_mean(seed))
    out.append(mc.check_drifted_laplace(seed))
    for n, lam in itertools.product((1, 2, 3), (0.5, 1.0, 2.0)):
        out.append(_tag(mc.check_iterated_passage_laplace(seed, depth=n, lam=lam), n=n, lam=lam))
    out.append(mc.check_stable_laplace(seed))
    out.append(_tag(mc.check_sinh_ratio(seed, t=0.5), t=0.5))
    out.append(mc.check_hyperbolic_mean(seed))
    out.append(mc.check_half_normal_mean(seed))
    out.append(mc.check_slow_down(seed))
    return out


SUITES = {
    "normalization": normalization_records,
    "oracles": oracle_records,
    "pde": pde_records,
    "identities": identity_records,
    "moments": moment_records,
}


def run_suite(name: str, seed: int, law_id: str | None = None, gamma: float | None = None) -> list[CheckResult]:
    if name == "all":
        return [rec for key in SUITES for rec in run_suite(key, seed, law_id, gamma)]
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    if name == "pde":
        return pde_records(seed, law_id, gamma)
    return SUITES[name](seed)


def summarize(records: list[CheckResult]) -> dict:
    counted = [r for r in records if not r.informational]
    failed = [r.name for r in counted if not r.passed]
    return dict(total=len(records), counted=len(counted), passed=len(counted) - len(failed),
                failed=len(failed), informational=len(records) - len(counted), failures=failed)
