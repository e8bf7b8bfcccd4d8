"""Hyperbolic-distance laws on the Poincare half-plane and half-space.

The canonical clock is the generator with factor 1/2 ("half").  The
convention without it ("whole") runs the same process at twice the speed,
so ``p(eta, t, "whole") = p(eta, 2t, "half")`` for the plain laws and
``p(eta, t, "whole") = p(eta, sqrt(2) t, "half")`` for the laws stopped at
the first-passage time T_t.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from . import special_fn as sf
from .densities import levy_density
from .errors import DomainError
from .special_fn import DEFAULT_QUAD, QuadratureConfig

CONVENTIONS = ("half", "whole")
_CUT = 50.0


def _log_sinh(x: float) -> float:
    if x > 20:
        return x - math.log(2) + math.log1p(-math.exp(-2 * x))
    if x < 1e-6:
        return math.log(x) + x * x / 6
    return math.log(math.sinh(x))


def _log_sinh_minus(x: float) -> float:
    """log(sinh x) - x."""
    if x > 1.0:
        return math.log1p(-math.exp(-2 * x)) - math.log(2)
    return _log_sinh(x) - x


def _log_cosh_gap(eta: float, d: float) -> float:
    """log(cosh(eta + d) - cosh(eta)) - log(sinh(eta)) for d > 0, without cancellation."""
    h = 0.5 * d
    e = math.exp(-2 * h)
    # log(cosh h + sinh h coth eta) written without overflow
    return h + math.log((1 + e) + (1 - e) / math.tanh(eta)) + _log_sinh(h)


def _check(eta, t, convention):
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}")
    if not t > 0:
        raise DomainError("t must be positive")
    if not eta > 0:
        raise DomainError("eta must be positive")


def plain_time(t: float, convention: str) -> float:
    return 2 * t if convention == "whole" else t


def stopped_time(t: float, convention: str) -> float:
    return math.sqrt(2) * t if convention == "whole" else t


def _singular_tail(log_g, eta: float, dmax: float, cfg: QuadratureConfig) -> float:
    """Integral of exp(log_g(d)) sqrt(sinh eta / (cosh(eta + d) - cosh eta)) over 0 < d < dmax.

    The substitution d = u^2 removes the inverse square root.  Returns the
    integral as (value, log_scale).  ``log_g`` should be written relative
    to d = 0 so that no large terms cancel.
    """
    def logf(u):
        if u == 0:
            return log_g(0.0) + math.log(2)
        return log_g(u * u) + math.log(2 * u) - 0.5 * _log_cosh_gap(eta, u * u)

    ref = logf(0.0)
    val, _ = sf.quad(lambda u: math.exp(logf(u) - ref), 0.0, math.sqrt(dmax), cfg)
    return val, ref


# ------------------------------------------------------------------ plane

def _p2_reach(eta, t):
    # phi - eta beyond which exp(-phi^2/2t - phi/2) has dropped by e^-50
    b = eta / t + 0.5
    return t * (-b + math.sqrt(b * b + 2 * _CUT / t))


def p2_density(eta: float, t: float, convention: str = "half",
               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Density of the hyperbolic distance of planar hyperbolic Brownian motion.

    sinh(eta) e^(-t/8) / sqrt(pi t^3) * int_eta^inf phi e^(-phi^2/2t) / sqrt(cosh phi - cosh eta) dphi
    """
    _check(eta, t, convention)
    t = plain_time(t, convention)
    # the Gaussian factor is split as e^(-eta^2/2t) e^(-d(2 eta + d)/2t) to avoid cancellation
    log_g = lambda d: math.log(eta + d) - d * (2 * eta + d) / (2 * t)
    val, ref = _singular_tail(log_g, eta, _p2_reach(eta, t), cfg)
    return math.exp(ref - eta * eta / (2 * t) + 0.5 * _log_sinh(eta) - t / 8
                    - 0.5 * math.log(math.pi * t ** 3)) * val


def laaa_kernel(eta: float, t_prime: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Heat kernel of the generator without the factor 1/2, at time t'.

    e^(-t'/4) / sqrt(pi (2t')^3) * int_eta^inf phi e^(-phi^2/4t') / sqrt(cosh phi - cosh eta) dphi
    """
    _check(eta, t_prime, "half")
    log_g = lambda d: math.log(eta + d) - d * (2 * eta + d) / (4 * t_prime)
    val, ref = _singular_tail(log_g, eta, _p2_reach(eta, 2 * t_prime), cfg)
    return math.exp(ref - eta * eta / (4 * t_prime) - 0.5 * _log_sinh(eta) - t_prime / 4
                    - 0.5 * math.log(math.pi * (2 * t_prime) ** 3)) * val


def p2_survival(x: float, t: float, convention: str = "half",
                cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Pr{eta(t) > x} = 2 e^(-t/8)/sqrt(pi t^3) int_x^inf phi e^(-phi^2/2t) sqrt(cosh phi - cosh x) dphi."""
    if x <= 0:
        return 1.0
    _check(x, t, convention)
    t = plain_time(t, convention)
    # offset v = phi - x; the x-only terms are pulled out of the integral
    lead = -x * x / (2 * t) + 0.5 * _log_sinh(x)

    def logf(v):
        if v <= 0:
            return -math.inf
        return math.log(x + v) - v * (2 * x + v) / (2 * t) + 0.5 * _log_cosh_gap(x, v)

    peak = max(0.0, 0.5 * t + math.sqrt(t) - x)
    hi = peak + math.sqrt(2 * t * _CUT) + 2 * _CUT * t / max(x + peak, 1.0) + t
    ref = max(logf(peak) if peak > 0 else -math.inf, logf(1e-3 * math.sqrt(t)))
    pts = [p for p in (math.sqrt(t), peak) if 0 < p < hi]
    val, _ = sf.quad(lambda v: math.exp(logf(v) - ref), 0.0, hi, cfg, points=pts or None)
    return min(1.0, math.exp(lead + ref + math.log(2) - t / 8 - 0.5 * math.log(math.pi * t ** 3)) * val)


def p2_cdf(x, t, convention="half", cfg: QuadratureConfig = DEFAULT_QUAD):
    return 1.0 - p2_survival(x, t, convention, cfg)


def p2_bessel_form(eta: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """e^(-t/8)/sqrt(pi t) * E[1{R(t) > eta} sinh eta / sqrt(cosh R(t) - cosh eta)].

    R is the planar Bessel process from 0; the expectation is taken by
    quadrature against its Rayleigh density.
    """
    _check(eta, t, "half")
    log_g = lambda d: math.log((eta + d) / t) - d * (2 * eta + d) / (2 * t)
    val, ref = _singular_tail(log_g, eta, _p2_reach(eta, t), cfg)
    return math.exp(ref - eta * eta / (2 * t) + 0.5 * _log_sinh(eta) - t / 8
                    - 0.5 * math.log(math.pi * t)) * val


# ------------------------------------------------------------------ space

def p3_density(eta, t: float, convention: str = "half", form: str = "direct"):
    """Density of the hyperbolic distance in the half-space.

    Forms (all equal): ``direct`` 2 sinh(eta) e^(-t/2) eta e^(-eta^2/2t) / sqrt(2 pi t^3);
    ``bessel`` (sinh(eta)/eta) e^(-t/2) q3(eta, t) with q3 the 3-dimensional
    Bessel law; ``fpt`` 2 sinh(eta) e^(-t/2) times the first-passage density of
    level eta; ``drifted`` 2 sinh(eta) e^(-eta) times the first-passage density
    of level eta for Brownian motion with unit drift.
    """
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}")
    if not t > 0:
        raise DomainError("t must be positive")
    t = plain_time(t, convention)
    ea = np.asarray(eta, dtype=float)
    if np.any(ea <= 0):
        raise DomainError("eta must be positive")
    with np.errstate(over="ignore"):
        if form == "direct":
            lg = (math.log(2) + np.log(ea) + np.vectorize(_log_sinh)(ea) - t / 2 - ea * ea / (2 * t)
                  - 0.5 * math.log(2 * math.pi * t ** 3))
            out = np.exp(lg)
        elif form == "bessel":
            q3 = 2 * ea * ea * np.exp(-ea * ea / (2 * t)) / ((2 * t) ** 1.5 * math.gamma(1.5))
            out = np.sinh(ea) / ea * math.exp(-t / 2) * q3
        elif form == "fpt":
            out = 2 * np.sinh(ea) * math.exp(-t / 2) * ea * np.exp(-ea * ea / (2 * t)) / math.sqrt(2 * math.pi * t ** 3)
        elif form == "drifted":
            fd = ea * np.exp(-(ea - t) ** 2 / (2 * t)) / math.sqrt(2 * math.pi * t ** 3)
            out = 2 * np.sinh(ea) * np.exp(-ea) * fd
        else:
            raise ValueError(f"unknown form {form!r}")
    return float(out) if out.ndim == 0 else out


def p3_cdf(x, t: float, convention: str = "half"):
    """Closed form Phi(a) + Phi(b) - 1 - (phi(a) - phi(b))/sqrt(t), a = (x-t)/sqrt t, b = (x+t)/sqrt t."""
    t = plain_time(t, convention)
    xa = np.asarray(x, dtype=float)
    st = math.sqrt(t)
    a, b = (xa - t) / st, (xa + t) / st
    # Phi(a) + Phi(b) - 1 = Phi(a) - Phi(-b), written to keep precision in both tails
    core = special.ndtr(a) - special.ndtr(-b)
    dens = (np.exp(-0.5 * a * a) - np.exp(-0.5 * b * b)) / math.sqrt(2 * math.pi)
    out = np.clip(np.where(xa > 0, core - dens / st, 0.0), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sinh_ratio_expectation(t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """E[sinh R3(t) / R3(t)] for the 3-dimensional Bessel process, by quadrature."""
    def f(r):
        return math.exp(_log_sinh(r) - math.log(r) + 2 * math.log(r) - r * r / (2 * t)
                        - 1.5 * math.log(2 * t) - math.lgamma(1.5) + math.log(2)) if r > 0 else 0.0
    hi = t + math.sqrt(t) * 20 + 20
    return sf.quad(f, 0, hi, cfg, points=[t])[0]


# ------------------------------------------------------- stopped at T_t

def _kve2(x: float) -> float:
    """e^x K2(x); scipy's kve is fast but returns nan for huge arguments."""
    if x < 1e8:
        return float(special.kve(2, x))
    return sf.bessel_k(2.0, x, scaled=True)


def _log_k2_scaled(x, k2):
    """log(e^x K2(x)), directly or as K0 + (2/x) K1."""
    if k2 == "recursion":
        return math.log(sf.bessel_k(0.0, x, scaled=True) + 2 / x * sf.bessel_k(1.0, x, scaled=True))
    return math.log(_kve2(x))


def pj2_density(eta: float, t: float, convention: str = "half", k2: str = "direct",
                cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Density of the planar hyperbolic distance at the first-passage time T_t.

    t sinh(eta) / (sqrt(8) pi) int_eta^inf phi K2(sqrt(phi^2+t^2)/2) / ((phi^2+t^2) sqrt(cosh phi - cosh eta)) dphi
    ``k2="recursion"`` evaluates K2 as K0 + (2/x) K1.
    """
    _check(eta, t, convention)
    t = stopped_time(t, convention)

    q0 = math.sqrt(eta * eta + t * t)

    def log_g(d):
        phi = eta + d
        q = math.sqrt(phi * phi + t * t)
        # exponent of K2 relative to its value at phi = eta
        shift = 0.5 * d * (2 * eta + d) / (q + q0)
        return math.log(phi) - 2 * math.log(q) + _log_k2_scaled(0.5 * q, k2) - shift

    val, ref = _singular_tail(log_g, eta, 4 * _CUT, cfg)
    # -q0/2 + log(sinh eta)/2 with the leading eta cancelled exactly
    lead = -0.5 * t * t / (eta + q0) + 0.5 * _log_sinh_minus(eta)
    return math.exp(ref + lead + math.log(t) - math.log(math.sqrt(8) * math.pi)) * val


def pj2_survival(x: float, t: float, convention: str = "half",
                 cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Pr{eta > x} = (t/(sqrt 2 pi)) int_x^inf phi sqrt(cosh phi - cosh x) K2(sqrt(phi^2+t^2)/2) / (phi^2+t^2) dphi."""
    if x <= 0:
        return 1.0
    _check(x, t, convention)
    t = stopped_time(t, convention)
    # with phi = x + v the growth of sqrt(cosh phi - cosh x) and the decay of
    # K2 cancel analytically, leaving only O(1) terms in the exponent
    lead = 0.5 * _log_sinh_minus(x)
    cth = 1.0 / math.tanh(x)

    def f(v):
        if v <= 0:
            return 0.0
        phi = x + v
        d = phi * phi + t * t
        q = math.sqrt(d)
        h = 0.5 * v
        e = math.exp(-v)
        expo = (math.log(phi) - math.log(d) + math.log(_kve2(0.5 * q))
                + 0.5 * (math.log((1 + e) + (1 - e) * cth) + _log_sinh_minus(h))
                - 0.5 * t * t / (phi + q))
        return math.exp(lead + expo)

    total = sum(sf.quad(f, a, b, cfg)[0] for a, b in ((0.0, 1.0), (1.0, 10.0), (10.0, 100.0)))
    total += sf.quad_log(f, 100.0, math.inf, cfg)[0]
    return min(1.0, t / (math.sqrt(2) * math.pi) * total)


def pj2_cdf(x, t, convention="half", cfg: QuadratureConfig = DEFAULT_QUAD):
    return 1.0 - pj2_survival(x, t, convention, cfg)


def pj3_density(eta, t: float, convention: str = "half"):
    """(2/pi) eta t sinh(eta) K2(sqrt(eta^2+t^2)) / (eta^2+t^2) in the half convention.

    In the whole convention t is replaced by sqrt(2) t, giving
    (2 sqrt 2/pi) eta t sinh(eta) K2(sqrt(eta^2+2t^2)) / (eta^2+2t^2).
    """
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}")
    if not t > 0:
        raise DomainError("t must be positive")
    t = stopped_time(t, convention)
    ea = np.asarray(eta, dtype=float)
    if np.any(ea <= 0):
        raise DomainError("eta must be positive")
    # every factor is kept relative to eta so the tail never forms inf - inf
    ratio2 = (t / ea) ** 2
    sd = ea * np.sqrt(1 + ratio2)
    log_sinh_rel = np.log1p(-np.exp(-2 * ea)) - math.log(2)
    lg = (math.log(2 * t / math.pi) - np.log(ea) + log_sinh_rel - t * t / (ea + sd)
          - np.log1p(ratio2) + np.log(sf.bessel_k(2.0, sd, scaled=True)))
    out = np.exp(lg)
    return float(out) if out.ndim == 0 else out


def pj3_alt_prefactor(eta: float, t: float) -> float:
    """The variant with (eta^2 + t^2) in the prefactor and K2(sqrt(eta^2 + 2t^2))."""
    d = eta * eta + 2 * t * t
    return math.exp(math.log(2 * math.sqrt(2) / math.pi) + math.log(eta * t) + _log_sinh(eta)
                    - math.log(eta * eta + t * t) + sf.log_bessel_k(2.0, math.sqrt(d)))


def pj3_cdf(x: float, t: float, convention: str = "half",
            cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral of the half-space distribution function against the first-passage law."""
    if x <= 0:
        return 0.0
    t = stopped_time(t, convention)
    c = 1 / math.sqrt(2 * math.pi)

    def g(s):
        # scalar copy of p3_cdf(x, s) times the first-passage density
        if s <= 0:
            return 0.0
        st = math.sqrt(s)
        a, b = (x - s) / st, (x + s) / st
        f3 = special.ndtr(a) - special.ndtr(-b) - c * (math.exp(-0.5 * a * a) - math.exp(-0.5 * b * b)) / st
        return min(max(f3, 0.0), 1.0) * t * math.exp(-t * t / (2 * s)) * c / (s * st)
    # p3_cdf(x, s) drops from 1 to 0 around s = x over a width of order sqrt(x)
    w = 20 * math.sqrt(x) + 20
    edges = sorted({0.0, 0.1 * t * t, t * t, max(0.0, x - w), x, x + w, 2 * x + w, 10 * (x + t * t) + 10})
    edges.append(math.inf)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        # long panels are taken in log s, where the algebraic decay is mild
        total += (sf.quad_log(g, a, b, cfg) if a > 0 and b > 10 * a else sf.quad(g, a, b, cfg))[0]
    return min(1.0, total)


def subordinate(p_plain, eta: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral of p_plain(eta, s) times the first-passage density of level t, in log s."""
    def f(y):
        s = math.exp(y)
        return p_plain(eta, s) * levy_density(s, t) * s

    # the integrand lives where s is of order eta (travel) and t^2 (clock)
    centre = math.log(max(eta, 1e-3) + t * t)
    edges = [centre - 40, centre - 5, centre - 1, centre, centre + 1, centre + 5, centre + 12]
    return sum(sf.quad(f, a, b, cfg)[0] for a, b in zip(edges[:-1], edges[1:]))


def pj2_subordination(eta, t, convention="half", cfg: QuadratureConfig = DEFAULT_QUAD):
    ts = stopped_time(t, convention)
    return subordinate(lambda e, s: p2_density(e, s, "half", cfg), eta, ts, cfg)


def pj3_subordination(eta, t, convention="half", cfg: QuadratureConfig = DEFAULT_QUAD):
    ts = stopped_time(t, convention)
    return subordinate(lambda e, s: p3_density(e, s), eta, ts, cfg)


def j3_convention_probe(ts=(0.5, 1.0, 2.0), cfg: QuadratureConfig = DEFAULT_QUAD) -> dict:
    """Masses of the two candidate displays for the half-space law at T_t.

    Both use K2(sqrt(eta^2 + 2t^2)); they differ in the denominator
    (eta^2 + 2t^2) versus (eta^2 + t^2).  The verdict names the display whose
    mass is 1 within 1e-6 at every t.
    """
    def mass(f, t):
        edges = [0.0, 0.5, 2.0, 10.0, 50.0, 300.0, math.inf]
        return sum(sf.quad(lambda e: f(e, t) if e > 0 else 0.0, a, b, cfg)[0]
                   for a, b in zip(edges[:-1], edges[1:]))

    whole = {t: mass(lambda e, s: pj3_density(e, s, "whole"), t) for t in ts}
    alt = {t: mass(pj3_alt_prefactor, t) for t in ts}
    ok_whole = all(abs(m - 1) < 1e-6 for m in whole.values())
    ok_alt = all(abs(m - 1) < 1e-6 for m in alt.values())
    if ok_whole and not ok_alt:
        verdict = "eta^2+2t^2"
    elif ok_alt and not ok_whole:
        verdict = "eta^2+t^2"
    else:
        verdict = "undecided"
    return {"mass_eta2_plus_2t2": whole, "mass_eta2_plus_t2": alt, "verdict": verdict}
