"""Densities, distribution functions and moments of the Euclidean laws.

Closed forms are paired with the subordination integrals they come from,
so every law can be checked against an independent quadrature.  Laws
are wrapped in ``DensityFn`` objects carrying support, CDF and Mellin strip.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, interpolate, special, stats

from . import special_fn as sf
from .errors import DomainError, NumericalError, UnsupportedParameterError
from .special_fn import DEFAULT_QUAD, QuadratureConfig

LOG_2PI = math.log(2 * math.pi)


def _pos(name, v):
    if not v > 0:
        raise DomainError(f"{name} must be positive, got {v}")


def _boundary_value(gamma, finite_limit):
    """Value at r = 0 of a density with factor r^(gamma-1)."""
    if gamma > 1:
        return 0.0
    if gamma == 1:
        return finite_limit
    return math.inf


# ------------------------------------------------------------------ DensityFn

@dataclass(frozen=True, eq=False)
class DensityFn:
    """A univariate law with declared support, density and CDF.

    ``pdf_fn`` and ``cdf_fn`` accept numpy arrays when ``vectorized``;
    otherwise they are scalar and a CDF table on a log (or asinh) grid is
    built at construction and interpolated with cubic Hermite splines.  The
    grid is refined by bisection until every interval midpoint is within
    ``table_tol`` of the exact CDF.
    ``table_pdf_fn``, when given, replaces ``pdf_fn`` for the table slopes.
    ``convergence_strip`` is the open interval of eta where the Mellin
    transform exists, so the moment of order k exists iff k + 1 lies in it.
    """

    law: str
    params: Mapping = field(default_factory=dict)
    support: tuple = (0.0, math.inf)
    pdf_fn: Callable = None
    cdf_fn: Callable | None = None
    vectorized: bool = True
    convergence_strip: tuple = (-math.inf, math.inf)
    scale: float = 1.0
    nested: bool = False
    table_span: float = 1e5
    table_nodes: int = 121
    table_tol: float = 1e-9
    table_rounds: int = 8
    table_pdf_fn: Callable | None = None
    _table: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.pdf_fn is None:
            raise ValueError("pdf_fn is required")
        object.__setattr__(self, "params", dict(self.params))
        if not self.vectorized:
            object.__setattr__(self, "_table", self._build_table())

    # mapping between x and the table coordinate u
    def _to_u(self, x):
        lo, hi = self.support
        if lo == -math.inf:
            return np.arcsinh(np.asarray(x) / self.scale)
        return np.log((np.asarray(x) - lo) / self.scale)

    def _from_u(self, u):
        lo, hi = self.support
        if lo == -math.inf:
            return self.scale * np.sinh(u)
        return lo + self.scale * np.exp(u)

    def _dx_du(self, u):
        if self.support[0] == -math.inf:
            return self.scale * np.cosh(u)
        return self.scale * np.exp(u)

    def _build_table(self):
        umax = math.asinh(self.table_span) if self.support[0] == -math.inf else math.log(self.table_span)
        u = np.linspace(-umax, umax, self.table_nodes)
        u = u[self._from_u(u) < self.support[1]]
        F, dF = self._table_values(u)
        # bisect every interval whose spline midpoint misses the exact CDF
        pending = np.arange(len(u) - 1)
        for _ in range(self.table_rounds):
            spline = interpolate.CubicHermiteSpline(u, F, dF)
            um = 0.5 * (u[pending] + u[pending + 1])
            Fm, dFm = self._table_values(um)
            bad = np.abs(spline(um) - Fm) > self.table_tol
            order = np.argsort(np.concatenate([u, um[bad]]))
            u = np.concatenate([u, um[bad]])[order]
            F = np.concatenate([F, Fm[bad]])[order]
            dF = np.concatenate([dF, dFm[bad]])[order]
            if not np.any(bad):
                break
            # the two halves of each split interval are checked next round
            pos = np.searchsorted(u, um[bad])
            pending = np.concatenate([pos - 1, pos])
        F = np.clip(np.maximum.accumulate(F), 0.0, 1.0)
        return u, F, interpolate.CubicHermiteSpline(u, F, dF)

    def _table_values(self, u):
        x = self._from_u(u)
        F = np.array([float(self.cdf_fn(float(v))) for v in x])
        pdf = self.table_pdf_fn or self.pdf_fn
        dF = np.array([float(pdf(float(v))) for v in x]) * self._dx_du(u)
        return F, dF

    def pdf(self, x):
        """Density; zero outside the support."""
        xa = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (xa > lo) & (xa < hi)
        if self.vectorized:
            with np.errstate(all="ignore"):
                val = np.where(inside, self.pdf_fn(np.where(inside, xa, self._interior())), 0.0)
        else:
            val = np.array([self.pdf_fn(float(v)) if ok else 0.0
                            for v, ok in zip(xa.ravel(), inside.ravel())]).reshape(xa.shape)
        return float(val) if val.ndim == 0 else val

    def _interior(self):
        lo, hi = self.support
        if math.isinf(lo) and math.isinf(hi):
            return 0.0
        if math.isinf(hi):
            return lo + self.scale
        return 0.5 * (lo + hi)

    def cdf(self, x):
        """Distribution function, monotone and clipped to [0, 1]."""
        xa = np.asarray(x, dtype=float)
        lo, hi = self.support
        if self.vectorized:
            inside = np.where((xa > lo) & (xa < hi), xa, self._interior())
            with np.errstate(all="ignore"):
                val = np.where(xa <= lo, 0.0, np.where(xa >= hi, 1.0, self.cdf_fn(inside)))
        else:
            u_nodes, F_nodes, spline = self._table
            flat = xa.ravel()
            val = np.empty(flat.shape)
            below, above = flat <= lo, flat >= hi
            val[below], val[above] = 0.0, 1.0
            mid = ~(below | above)
            u = self._to_u(flat[mid]) if np.any(mid) else np.empty(0)
            inwin = (u >= u_nodes[0]) & (u <= u_nodes[-1])
            out = np.empty(u.shape)
            if np.any(inwin):
                ui = u[inwin]
                k = np.clip(np.searchsorted(u_nodes, ui) - 1, 0, len(u_nodes) - 2)
                out[inwin] = np.clip(spline(ui), F_nodes[k], F_nodes[k + 1])
            for j in np.flatnonzero(~inwin):
                out[j] = self.cdf_fn(float(flat[mid][j]))
            val[mid] = out
            val = val.reshape(xa.shape)
        val = np.clip(val, 0.0, 1.0)
        return float(val) if val.ndim == 0 else val

    def panels(self):
        lo, hi = self.support
        if math.isinf(lo):
            pos = [self.scale * 10.0 ** k for k in range(-4, 5)]
            return [-math.inf] + [-p for p in reversed(pos)] + [0.0] + pos + [math.inf]
        if math.isinf(hi):
            return [lo] + [lo + self.scale * 10.0 ** k for k in range(-6, 7)] + [math.inf]
        return list(np.linspace(lo, hi, 5))

    def expect(self, g: Callable[[float], float], cfg: QuadratureConfig = DEFAULT_QUAD,
               points=None) -> float:
        """Integral of g(x) pdf(x) over the support, panel by panel."""
        pts = self.panels()
        if points is not None:
            pts = sorted(set(pts) | {p for p in points if self.support[0] < p < self.support[1]})
        f = lambda x: g(x) * self.pdf(x)
        total, err = 0.0, 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if math.isinf(b) and a > 0:
                val, e = sf.quad_log(f, a, math.inf, cfg)
            elif math.isinf(a) and b < 0:
                val, e = sf.quad_log(lambda x: f(-x), -b, math.inf, cfg)
            else:
                val, e = integrate.quad(f, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                        limit=cfg.max_subdivisions)
            total += val
            err += e
        if not math.isfinite(total):
            raise NumericalError("expectation is not finite", estimate=err)
        return total

    def normalization(self, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
        return self.expect(lambda x: 1.0, cfg)

    def moment_exists(self, order: float) -> bool:
        lo, hi = self.convergence_strip
        return lo < order + 1 < hi

    def moment(self, order: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
        if not self.moment_exists(order):
            raise DomainError(f"moment of order {order} does not exist for {self.law}")
        return self.expect(lambda x: x ** order, cfg)


# ----------------------------------------------------------- Bessel laws

def bessel_zero_start(gamma, r, t):
    """Law of R^gamma(t) started at 0: 2 r^(g-1) e^(-r^2/2t) / ((2t)^(g/2) Gamma(g/2))."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        lg = (math.log(2) + (gamma - 1) * np.log(r) - r * r / (2 * t)
              - gamma / 2 * math.log(2 * t) - special.gammaln(gamma / 2))
    out = np.exp(lg)
    if np.any(r == 0):
        out = np.where(r == 0, _boundary_value(gamma, 2 / math.sqrt(2 * math.pi * t)), out)
    return float(out) if out.ndim == 0 else out


def bessel_zero_start_cdf(gamma, r, t):
    return special.gammainc(gamma / 2, np.asarray(r, dtype=float) ** 2 / (2 * t))


def bessel_transition(gamma: float, x: float, r: float, t: float) -> float:
    """Transition density of R^gamma from x to r in time t."""
    _pos("gamma", gamma)
    _pos("t", t)
    if x < 0 or r < 0:
        raise DomainError("x and r must be nonnegative")
    if x == 0:
        return bessel_zero_start(gamma, r, t)
    if r == 0:
        return _boundary_value(gamma, math.sqrt(2 / (math.pi * t)) * math.exp(-x * x / (2 * t)))
    nu = gamma / 2 - 1
    z = x * r / t
    # I_nu(z) e^-z keeps the exponent in range
    ie = sf.bessel_i(nu, z, scaled=True)
    lg = math.log(r / t) + nu * math.log(r / x) - (x - r) ** 2 / (2 * t)
    return math.exp(lg) * ie


def bessel_transition_cdf(gamma, x, r, t):
    """R^2/t is noncentral chi-square with gamma degrees of freedom."""
    if x == 0:
        return bessel_zero_start_cdf(gamma, r, t)
    return stats.ncx2.cdf(np.asarray(r, dtype=float) ** 2 / t, gamma, x * x / t)


def _log_p(gamma, r, s):
    return (math.log(2) + (gamma - 1) * math.log(r) - r * r / (2 * s)
            - gamma / 2 * math.log(2 * s) - float(special.gammaln(gamma / 2)))


def iterated_bessel_quadrature(gamma: float, r: float, t: float,
                               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """q(r,t) as the integral of p(r,s) p(s,t) over s, computed in log s."""
    _pos("gamma", gamma)
    _pos("t", t)
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0:
        if gamma != 1:
            return _boundary_value(gamma, 0.0)
        # q(0, t) = E[p(0, S)] with p(0, s) = 2 / sqrt(2 pi s)
        inv = sf.quad(lambda s: bessel_zero_start(1.0, s, t) / math.sqrt(s), 0, math.inf, cfg)[0]
        return 2 / math.sqrt(2 * math.pi) * inv

    def h(y):
        s = math.exp(y)
        return _log_p(gamma, r, s) + _log_p(gamma, s, t) + y

    def dh(y):
        s = math.exp(y)
        return r * r / (2 * s) + gamma / 2 - s * s / t

    return float(sf.log_integral(h, dh=dh, scale=0.5, cfg=cfg))


def iterated_bessel_density(gamma: float, r, t: float, method: str = "quadrature",
                            cfg: QuadratureConfig = DEFAULT_QUAD, contour=None):
    """Density of the iterated Bessel process R1(R2(t)) by quadrature or Fox H."""
    if method == "quadrature":
        ra = np.asarray(r, dtype=float)
        if ra.ndim == 0:
            return iterated_bessel_quadrature(gamma, float(ra), t, cfg)
        return np.array([iterated_bessel_quadrature(gamma, float(v), t, cfg) for v in ra])
    if method == "fox":
        from .mellin_fox import ContourSpec, iterated_bessel_fox_density
        out = iterated_bessel_fox_density(gamma, r, t, contour or ContourSpec(), cfg)
        return float(out) if np.ndim(out) == 0 else out
    raise ValueError(f"unknown method {method!r}")


def iterated_bessel_cdf(gamma: float, r: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Pr{I_R(t) <= r} = E[P(R1(S) <= r)] with S = R2(t)."""
    if r <= 0:
        return 0.0
    g = lambda s: float(special.gammainc(gamma / 2, r * r / (2 * s))) * bessel_zero_start(gamma, s, t)
    pts = [math.sqrt(t) * c for c in (0.1, 1.0, 10.0)]
    return _quad_panels(g, pts, cfg)


def _quad_panels(g, pts, cfg, lo=0.0, hi=math.inf):
    edges = [lo] + sorted(p for p in pts if lo < p < hi) + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(g, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                limit=cfg.max_subdivisions)[0]
    return total


def jr_density(gamma: float, r, t: float):
    """Density of J_R(t) = R1(R2(t)^2): 4 r^(g-1) K0(r/sqrt t) / (2^g t^(g/2) Gamma(g/2)^2)."""
    _pos("gamma", gamma)
    _pos("t", t)
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise DomainError("r must be nonnegative")
    safe = np.where(ra > 0, ra, 1.0)
    lg = (math.log(4) + (gamma - 1) * np.log(safe) - gamma * math.log(2) - gamma / 2 * math.log(t)
          - 2 * special.gammaln(gamma / 2))
    out = np.exp(lg) * special.k0(safe / math.sqrt(t))
    if np.any(ra == 0):
        out = np.where(ra == 0, 0.0 if gamma > 1 else math.inf, out)
    return float(out) if out.ndim == 0 else out


def jr_subordination(gamma: float, r: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral of p(r,s) l(s,t) over s, with l the law of R2(t)^2."""
    def h(y):
        s = math.exp(y)
        ll = ((gamma / 2 - 1) * y - s / (2 * t) - gamma / 2 * math.log(2 * t)
              - float(special.gammaln(gamma / 2)))
        return _log_p(gamma, r, s) + ll + y

    def dh(y):
        s = math.exp(y)
        return r * r / (2 * s) - s / (2 * t)

    return float(sf.log_integral(h, dh=dh, scale=0.5, cfg=cfg))


def jr_cdf(gamma: float, r: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """J_R(t)^2 = 4t G1 G2 with G1, G2 independent Gamma(gamma/2) variables."""
    if r <= 0:
        return 0.0
    c = r * r / (4 * t)
    a = gamma / 2
    g = lambda x: float(special.gammainc(a, c / x)) * math.exp((a - 1) * math.log(x) - x - special.gammaln(a))
    return _quad_panels(g, [0.1 * a, a, 10 * a], cfg)


# ---------------------------------------------- Bessel at first-passage times

def levy_density(s, t):
    """First-passage density of standard BM through level t: t e^(-t^2/2s)/sqrt(2 pi s^3)."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s > 0, t * np.exp(-t * t / (2 * s)) / (math.sqrt(2 * math.pi) * s * np.sqrt(s)), 0.0)
    return float(out) if out.ndim == 0 else out


def levy_cdf(s, t):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(s > 0, special.erfc(t / np.sqrt(2 * np.where(s > 0, s, 1.0))), 0.0)
    return float(out) if out.ndim == 0 else out


def slow_down_probability(t: float) -> float:
    """Pr{T_t <= t} = erfc(sqrt(t/2))."""
    _pos("t", t)
    return float(special.erfc(math.sqrt(t / 2)))


def slow_down_derivative(t: float) -> float:
    """d/dt Pr{T_t <= t} = -e^(-t/2) / sqrt(2 pi t)."""
    _pos("t", t)
    return -math.exp(-t / 2) / math.sqrt(2 * math.pi * t)


def _c_fpt(gamma):
    return math.exp(special.gammaln((gamma + 1) / 2) - special.gammaln(gamma / 2)) / math.sqrt(math.pi)


def bessel_at_fpt_density(gamma: float, r, t: float):
    """Density of R^gamma(T_t): 2t C r^(g-1) / (r^2+t^2)^((g+1)/2)."""
    _pos("gamma", gamma)
    _pos("t", t)
    ra = np.asarray(r, dtype=float)
    c = 2 * t * _c_fpt(gamma)
    with np.errstate(divide="ignore"):
        out = c * np.exp((gamma - 1) * np.log(ra) - (gamma + 1) / 2 * np.log(ra * ra + t * t))
    if np.any(ra == 0):
        out = np.where(ra == 0, _boundary_value(gamma, c / t ** 2), out)
    return float(out) if out.ndim == 0 else out


def bessel_at_fpt_cdf(gamma, r, t):
    """R^2/(R^2+t^2) is Beta(gamma/2, 1/2)."""
    r = np.asarray(r, dtype=float)
    return special.betainc(gamma / 2, 0.5, r * r / (r * r + t * t))


def bessel_at_fpt_sf(gamma, r, t):
    r = np.asarray(r, dtype=float)
    return special.betainc(0.5, gamma / 2, t * t / (r * r + t * t))


def bessel_at_fpt_tail(gamma: int, r: float, t: float) -> float:
    """Explicit Pr{R^gamma(T_t) > r} for gamma in {2, 3, 4}."""
    d = t * t + r * r
    if gamma == 2:
        return t / math.sqrt(d)
    if gamma == 3:
        return 4 * t / math.pi * (r / (2 * d) + (math.pi / 2 - math.atan(r / t)) / (2 * t))
    if gamma == 4:
        return t / math.sqrt(d) + t * r * r / (2 * d ** 1.5)
    raise UnsupportedParameterError("explicit tails are tabulated for gamma in {2, 3, 4}")


def bessel_at_fpt_moment(mu: float, gamma: float, t: float) -> float:
    """E R^gamma(T_t)^mu = Gamma((g+mu)/2) Gamma((1-mu)/2) t^mu / (sqrt(pi) Gamma(g/2))."""
    if not -gamma < mu < 1:
        raise DomainError("the moment exists only for -gamma < mu < 1")
    return math.exp(special.gammaln((gamma + mu) / 2) + special.gammaln((1 - mu) / 2)
                    - special.gammaln(gamma / 2) + mu * math.log(t)) / math.sqrt(math.pi)


def bessel_at_fpt_subordination(gamma, r, t, cfg: QuadratureConfig = DEFAULT_QUAD):
    """Integral of p(r,s) times the first-passage density of level t."""
    def h(y):
        s = math.exp(y)
        return _log_p(gamma, r, s) + math.log(t) - t * t / (2 * s) - 0.5 * (LOG_2PI + 3 * y) + y

    return float(sf.log_integral(h, mode=math.log((r * r + t * t) / (gamma + 1)), scale=0.5, cfg=cfg))


def hat_r_density(gamma: float, w, t: float):
    """Density of 1/(1 + R^gamma(T_t)) on (0, 1).

    Equals 2t C (1-w)^(g-1) [(1+t^2)((w-B)^2 + A^2)]^(-(g+1)/2)
    with A = t/(1+t^2), B = 1/(1+t^2).
    """
    _pos("gamma", gamma)
    _pos("t", t)
    wa = np.asarray(w, dtype=float)
    if np.any((wa <= 0) | (wa >= 1)):
        raise DomainError("w must lie in (0, 1)")
    A, B = t / (1 + t * t), 1 / (1 + t * t)
    out = (2 * t * _c_fpt(gamma) * np.exp((gamma - 1) * np.log1p(-wa)
           - (gamma + 1) / 2 * np.log((1 + t * t) * ((wa - B) ** 2 + A * A))))
    return float(out) if out.ndim == 0 else out


def hat_r_cdf(gamma, w, t):
    w = np.asarray(w, dtype=float)
    return bessel_at_fpt_sf(gamma, (1 - w) / w, t)


def lkwert_density(w, t):
    """Cauchy-type form at gamma = 1: (2/pi) A / ((w-B)^2 + A^2)."""
    A, B = t / (1 + t * t), 1 / (1 + t * t)
    return 2 / math.pi * A / ((np.asarray(w) - B) ** 2 + A * A)


def beta_arcsin_density(gamma: float, r, t: float):
    """Density of t^3/(t^2 + R^gamma(T_t)^2): t Beta(1/2, gamma/2) on (0, t)."""
    _pos("gamma", gamma)
    _pos("t", t)
    ra = np.asarray(r, dtype=float)
    if np.any((ra <= 0) | (ra >= t)):
        raise DomainError("r must lie in (0, t)")
    x = ra / t
    out = np.exp(-0.5 * np.log(x) + (gamma / 2 - 1) * np.log1p(-x) - special.betaln(gamma / 2, 0.5)) / t
    return float(out) if out.ndim == 0 else out


def beta_arcsin_cdf(gamma, r, t):
    return special.betainc(0.5, gamma / 2, np.asarray(r, dtype=float) / t)


def inverse_bessel_at_fpt_density(gamma: float, r, t: float):
    """Density of 1/R^gamma(T_t): 2t C (1 + r^2 t^2)^(-(g+1)/2)."""
    _pos("gamma", gamma)
    _pos("t", t)
    ra = np.asarray(r, dtype=float)
    out = 2 * t * _c_fpt(gamma) * np.exp(-(gamma + 1) / 2 * np.log1p((ra * t) ** 2))
    return float(out) if out.ndim == 0 else out


def inverse_bessel_at_fpt_cdf(gamma, r, t):
    r = np.asarray(r, dtype=float)
    return special.betainc(0.5, gamma / 2, (r * t) ** 2 / (1 + (r * t) ** 2))


def folded_student_t_density(n: float, r):
    r = np.asarray(r, dtype=float)
    return 2 * stats.t.pdf(r, n)


def inverted_composition_density(gamma: float, x, t: float):
    """Density of T_{R^gamma(t)}: C sqrt(t) x^(g/2-1) / (x+t)^((g+1)/2)."""
    _pos("gamma", gamma)
    _pos("t", t)
    xa = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = _c_fpt(gamma) * math.sqrt(t) * np.exp((gamma / 2 - 1) * np.log(xa)
                                                    - (gamma + 1) / 2 * np.log(xa + t))
    if np.any(xa == 0):
        out = np.where(xa == 0, _boundary_value(gamma / 2 + 0.5, _c_fpt(gamma) / t), out)
    return float(out) if out.ndim == 0 else out


def inverted_composition_cdf(gamma, x, t):
    x = np.asarray(x, dtype=float)
    return special.betainc(gamma / 2, 0.5, x / (x + t))


def inverted_composition_quadrature(gamma, x, t, cfg: QuadratureConfig = DEFAULT_QUAD):
    """Integral of the level-s first-passage density at x against p(s,t)."""
    def h(y):
        s = math.exp(y)
        return (y - s * s / (2 * x) - 0.5 * (LOG_2PI + 3 * math.log(x))
                + _log_p(gamma, s, t) + y)

    mode = 0.5 * math.log((gamma + 1) * x * t / (x + t))
    return float(sf.log_integral(h, mode=mode, scale=0.5, cfg=cfg))


# ---------------------------------------------------------- stable laws

def stable_ratio_density(nu: float, w):
    """Lamperti law: (sin pi nu / pi) w^(nu-1) / (1 + w^(2nu) + 2 w^nu cos pi nu)."""
    if not 0 < nu < 1:
        raise DomainError("nu must lie in (0, 1)")
    wa = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        wn = wa ** nu
        out = math.sin(math.pi * nu) / math.pi * wn / wa / (1 + wn * wn + 2 * wn * math.cos(math.pi * nu))
    return float(out) if out.ndim == 0 else out


def stable_ratio_cdf(nu, w):
    wa = np.asarray(w, dtype=float)
    s, c = math.sin(math.pi * nu), math.cos(math.pi * nu)
    return (np.arctan((wa ** nu + c) / s) - (math.pi / 2 - math.pi * nu)) / (math.pi * nu)


def stable_ratio_mellin(nu: float, eta: float) -> float:
    """sin(pi eta) / (nu sin(pi (1-eta)/nu)) for 1 - nu < eta < 1 + nu."""
    if not 1 - nu < eta < 1 + nu:
        raise DomainError("eta must lie in (1 - nu, 1 + nu)")
    if eta == 1:
        return 1.0
    return math.sin(math.pi * eta) / (nu * math.sin(math.pi * (1 - eta) / nu))


def mittag_leffler_integral(nu: float, lam: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Quadrature of the Laplace transform of the Lamperti law at lam^(1/nu) t."""
    s = lam ** (1 / nu) * t
    f = lambda u: math.exp(-u) * stable_ratio_density(nu, u / s) / s
    return sf.quad(f, 0, 1, cfg)[0] + sf.quad(f, 1, math.inf, cfg)[0]


def _cauchy_stable_series(nu, ax, kind, max_terms=200):
    """Large-|x| expansion at t = 1; convergent for nu < 1."""
    total = 0.0
    logx = math.log(ax)
    for k in range(1, max_terms):
        if kind == "pdf":
            lg = special.gammaln(nu * k + 1) - special.gammaln(k + 1) - (nu * k + 1) * logx
        else:
            lg = special.gammaln(nu * k) - special.gammaln(k + 1) - nu * k * logx
        size = math.exp(lg)
        total += (-1) ** (k + 1) * math.sin(math.pi * nu * k / 2) * size
        if size < 1e-17 * abs(total):
            break
    return total / math.pi


_SERIES_RATIO = 0.3


def _fourier_half_line(g, weight, ax, nu):
    """Integral of g(b) cos(b ax) or sin(b ax) over b > 0 at t = 1.

    A few periods are integrated directly with break points, the rest with
    QUADPACK's Fourier routine for semi-infinite ranges.
    """
    bmax = 745.0 ** (1 / nu)
    B = min(8.5 * math.pi / ax, bmax)
    pts = [p for p in (10.0 ** k for k in range(-3, 12)) if p < B]
    osc = math.cos if weight == "cos" else math.sin
    with warnings.catch_warnings():
        # roundoff warnings only mean the 1e-14 floor was reached
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head = integrate.quad(lambda b: osc(b * ax) * g(b), 0, B, points=pts, epsabs=1e-14,
                              epsrel=1e-12, limit=2000)[0]
        if B >= bmax:
            return head
        res = integrate.quad(g, B, math.inf, weight=weight, wvar=ax, epsabs=1e-15, limlst=400,
                             full_output=1)
    if not math.isfinite(res[0]) or abs(res[0]) > abs(head) + 1.0:
        raise NumericalError("Fourier tail integral failed", estimate=res[1])
    return head + res[0]


def _check_stable(nu, t):
    if not 0 < nu <= 1:
        raise DomainError("nu must lie in (0, 1]")
    _pos("t", t)


def cauchy_at_stable_density(nu: float, x: float, t: float) -> float:
    """Density of C(S_nu(t)): (1/pi) int_0^inf cos(bx) exp(-t b^nu) db.

    Reduced to t = 1 by self-similarity.  Moderate |x| use the split
    Fourier quadrature, large |x| the convergent series in |x|^-nu.
    """
    _check_stable(nu, t)
    c = t ** (1 / nu)
    if nu == 1:
        return t / (math.pi * (t * t + x * x))
    ax = abs(x) / c
    if ax == 0:
        return math.exp(special.gammaln(1 + 1 / nu)) / (math.pi * c)
    if ax ** -nu <= _SERIES_RATIO:
        return _cauchy_stable_series(nu, ax, "pdf") / c
    g = lambda b: math.exp(-b ** nu)
    return _fourier_half_line(g, "cos", ax, nu) / (math.pi * c)


def cauchy_at_stable_cdf(nu: float, x: float, t: float) -> float:
    """1/2 + (1/pi) int_0^inf sin(bx) exp(-t b^nu) / b db."""
    _check_stable(nu, t)
    if nu == 1:
        return 0.5 + math.atan(x / t) / math.pi
    if x == 0:
        return 0.5
    ax = abs(x) / t ** (1 / nu)
    if ax ** -nu <= _SERIES_RATIO:
        tail = _cauchy_stable_series(nu, ax, "cdf")
        return 1 - tail if x > 0 else tail
    g = lambda b: math.exp(-b ** nu) / b
    half = _fourier_half_line(g, "sin", ax, nu) / math.pi
    return 0.5 + half if x > 0 else 0.5 - half


# ------------------------------------------------------- drifted passage

def drifted_fpt_density(beta: float, mu: float, t):
    """Inverse Gaussian: beta e^(-(beta - mu t)^2 / 2t) / sqrt(2 pi t^3)."""
    _pos("beta", beta)
    ta = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ta > 0, beta * np.exp(-(beta - mu * ta) ** 2 / (2 * ta)) / np.sqrt(2 * math.pi * ta ** 3), 0.0)
    return float(out) if out.ndim == 0 else out


def drifted_fpt_cdf(beta, mu, t):
    """Pr{T^mu_beta <= t} from the law of the running maximum."""
    ta = np.asarray(t, dtype=float)
    st = np.sqrt(ta)
    with np.errstate(over="ignore"):
        a = np.exp(2 * mu * beta + stats.norm.logsf((beta + mu * ta) / st))
    out = a + stats.norm.sf((beta - mu * ta) / st)
    return float(out) if out.ndim == 0 else out


def drifted_fpt_mean(beta: float, mu: float) -> float:
    """E T^mu_beta = beta e^(beta mu) e^(-beta |mu|) / |mu|."""
    if mu == 0:
        return math.inf
    return beta * math.exp(beta * mu - beta * abs(mu)) / abs(mu)


def drifted_fpt_laplace(beta: float, mu: float, lam: float) -> float:
    return math.exp(beta * mu - beta * math.sqrt(2 * lam + mu * mu))


def drifted_fpt_moment(beta: float, mu: float, eta: float) -> float:
    """E (T^mu_beta)^eta = sqrt(2/pi) beta e^(mu beta) (beta/|mu|)^(eta-1/2) K_{eta-1/2}(|mu| beta)."""
    if mu == 0:
        raise DomainError("moments need a nonzero drift")
    a = abs(mu)
    lg = (0.5 * math.log(2 / math.pi) + math.log(beta) + mu * beta
          + (eta - 0.5) * math.log(beta / a) + sf.log_bessel_k(eta - 0.5, a * beta))
    return math.exp(lg)


def drifted_composite_density(gamma: float, mu: float, r, t: float):
    """Density of R^gamma(T^mu_t), mu >= 0.

    4t e^(t mu) r^(g-1) / (2^(g/2) Gamma(g/2) sqrt(2 pi)) (mu^2/(r^2+t^2))^((g+1)/4)
    K_{(g+1)/2}(|mu| sqrt(r^2+t^2)); mu = 0 gives the driftless law.
    """
    _pos("gamma", gamma)
    _pos("t", t)
    if mu < 0:
        raise UnsupportedParameterError("the drifted law is defective for mu < 0")
    if mu == 0:
        return bessel_at_fpt_density(gamma, r, t)
    ra = np.asarray(r, dtype=float)
    nu = (gamma + 1) / 2
    base = (math.log(4 * t) + t * mu - gamma / 2 * math.log(2) - special.gammaln(gamma / 2)
            - 0.5 * LOG_2PI)
    out = np.empty(ra.shape)
    for i, rv in np.ndenumerate(ra):
        if rv <= 0:
            out[i] = _boundary_value(gamma, math.exp(base + nu / 2 * math.log(mu * mu / (t * t))
                                                     + sf.log_bessel_k(nu, mu * t)))
            continue
        d = math.sqrt(rv * rv + t * t)
        out[i] = math.exp(base + (gamma - 1) * math.log(rv) + nu * math.log(mu / d)
                          + sf.log_bessel_k(nu, mu * d))
    return float(out) if out.ndim == 0 else out


def drifted_composite_subordination(gamma, mu, r, t, cfg: QuadratureConfig = DEFAULT_QUAD):
    """Integral of p(r,s) times the drifted first-passage density through t."""
    def h(y):
        s = math.exp(y)
        return (_log_p(gamma, r, s) + math.log(t) - (t - mu * s) ** 2 / (2 * s)
                - 0.5 * (LOG_2PI + 3 * y) + y)

    return float(sf.log_integral(h, mode=math.log((r * r + t * t) / (gamma + 1)), scale=0.5, cfg=cfg))


def drifted_composite_cdf(gamma, mu, r, t, cfg: QuadratureConfig = DEFAULT_QUAD):
    if r <= 0:
        return 0.0
    g = lambda s: float(special.gammainc(gamma / 2, r * r / (2 * s))) * drifted_fpt_density(t, mu, s)
    m = t / mu if mu > 0 else t * t
    return _quad_panels(g, [0.1 * m, m, 10 * m], cfg)


# ---------------------------------------------------- iterated passage

def iterated_fpt_laplace(n: int, lam: float, t: float) -> float:
    """E exp(-lam I^n(t)) = exp(-t lam^(1/2^n) 2^(1 - 1/2^n))."""
    if n < 1:
        raise DomainError("n must be at least 1")
    e = 0.5 ** n
    return math.exp(-t * lam ** e * 2 ** (1 - e))


def iterated_fpt_density(n: int, x: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Density of the n-fold iterated first-passage time, n in {1, 2}."""
    _pos("t", t)
    if n == 1:
        return levy_density(x, t)
    if n != 2:
        raise UnsupportedParameterError("densities are available for n in {1, 2}; use the Laplace transform")
    if x <= 0:
        return 0.0

    def h(y):
        s = math.exp(y)
        return (y - s * s / (2 * x) - 0.5 * (LOG_2PI + 3 * math.log(x))
                + math.log(t) - t * t / (2 * s) - 0.5 * (LOG_2PI + 3 * y) + y)

    def dh(y):
        s = math.exp(y)
        return 2 - s * s / x + t * t / (2 * s) - 1.5

    return float(sf.log_integral(h, dh=dh, scale=0.5, cfg=cfg))


def iterated_fpt_cdf(n, x, t, cfg: QuadratureConfig = DEFAULT_QUAD):
    if n == 1:
        return levy_cdf(x, t)
    if n != 2:
        raise UnsupportedParameterError("distribution functions are available for n in {1, 2}")
    if x <= 0:
        return 0.0
    # Pr{I <= x} = E erfc(T_t / sqrt(2x)); the smaller of the CDF and the
    # survival function is integrated directly, in log s, split where the
    # error function turns over
    c = math.sqrt(2 * x)
    upper = x > 20 * t ** 4
    kernel = special.erf if upper else special.erfc
    g = lambda s: float(kernel(s / c)) * float(levy_density(s, t))
    pts = sorted({1e-3 * t * t, t * t, min(max(c, 1e-3 * t * t), 1e300)})
    total = 0.0
    for a, b in zip(pts, pts[1:] + [math.inf]):
        total += sf.quad_log(g, a, b, cfg)[0]
    return 1.0 - total if upper else total


def ibm_density(x: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Density at t of B2(|B1(x)|), the iterated Brownian motion folded at 0."""
    f = lambda s: 2 * math.exp(-s * s / (2 * x)) / math.sqrt(2 * math.pi * x) * math.exp(
        -t * t / (2 * s)) / math.sqrt(2 * math.pi * s)
    return _quad_panels(f, [0.1 * math.sqrt(x), math.sqrt(x), 10 * math.sqrt(x)], cfg)


# ------------------------------------------------------------- identities

def identity_integral_lhs(gamma: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral of (t-y)^(g-1) / (1+y^2)^((g+1)/2) over (-1/t, t)."""
    f = lambda y: (t - y) ** (gamma - 1) / (1 + y * y) ** ((gamma + 1) / 2)
    return sf.quad(f, -1 / t, t, cfg, points=[0.0] if -1 / t < 0 < t else None)[0]


def identity_integral_rhs(gamma: float, t: float) -> float:
    """(1+t^2)^((g-1)/2) B(g/2, 1/2) / 2."""
    return (1 + t * t) ** ((gamma - 1) / 2) * 0.5 * float(special.beta(gamma / 2, 0.5))


def identity_integral_rhs_alt(gamma: float, t: float) -> float:
    """(t/(1+t^2))^((1-g)/2) B(g/2, 1/2) / 2, which holds only at t = 1 or g = 1."""
    return (t / (1 + t * t)) ** ((1 - gamma) / 2) * 0.5 * float(special.beta(gamma / 2, 0.5))


def identity_integral_check(gamma: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Residual of the by-product integral identity."""
    _pos("gamma", gamma)
    _pos("t", t)
    return identity_integral_lhs(gamma, t, cfg) - identity_integral_rhs(gamma, t)
