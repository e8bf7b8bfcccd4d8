"""Finite-difference residual checks of the governing equations of the densities.

Operators are assembled as sums c_k(r) d^k/dr^k.  Products of operators
are expanded exactly with the Leibniz rule, so factor order matters, and
the expanded operator is applied with centered second-order stencils.
Each check reports the residual on a grid of nodes at several step sizes
and the empirical convergence order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import densities as d
from . import hyperbolic as h
from . import mellin_fox as mf
from . import special_fn as sf
from .errors import DomainError, UnsupportedParameterError

PASS_SLOPE = 1.5
PASS_MAX = 1e-3
EXACT_FLOOR = 1e-9


# ------------------------------------------------------------ coefficients

class Coef:
    """A coefficient function of r that knows its derivative."""

    def __call__(self, r):
        raise NotImplementedError

    def deriv(self) -> Coef:
        raise NotImplementedError

    def __mul__(self, other):
        other = _coef(other)
        if isinstance(self, Laurent) and isinstance(other, Laurent):
            terms = {}
            for p, a in self.terms.items():
                for q, b in other.terms.items():
                    terms[p + q] = terms.get(p + q, 0.0) + a * b
            return Laurent(terms)
        return _Prod(self, other)

    __rmul__ = __mul__

    def __add__(self, other):
        other = _coef(other)
        if isinstance(self, Laurent) and isinstance(other, Laurent):
            terms = dict(self.terms)
            for p, b in other.terms.items():
                terms[p] = terms.get(p, 0.0) + b
            return Laurent(terms)
        return _Sum(self, other)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-_coef(other))


class Laurent(Coef):
    """Finite sum of a_p r^p with integer p."""

    def __init__(self, terms: dict):
        self.terms = {int(p): float(a) for p, a in terms.items() if a != 0}

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for p, a in self.terms.items():
            out = out + a * r ** p
        return out

    def deriv(self):
        return Laurent({p - 1: a * p for p, a in self.terms.items() if p != 0})


class Fn(Coef):
    """A function given with its first few derivatives."""

    def __init__(self, *funcs: Callable):
        self.funcs = funcs

    def __call__(self, r):
        return self.funcs[0](np.asarray(r, dtype=float))

    def deriv(self):
        if len(self.funcs) < 2:
            raise UnsupportedParameterError("no further derivative available for this coefficient")
        return Fn(*self.funcs[1:])


class _Prod(Coef):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, r):
        return self.a(r) * self.b(r)

    def deriv(self):
        return self.a.deriv() * self.b + self.a * self.b.deriv()


class _Sum(Coef):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, r):
        return self.a(r) + self.b(r)

    def deriv(self):
        return self.a.deriv() + self.b.deriv()


def _coef(c) -> Coef:
    return c if isinstance(c, Coef) else Laurent({0: float(c)})


def r_power(p: int, a: float = 1.0) -> Laurent:
    return Laurent({p: a})


def _coth(x):
    return 1 / np.tanh(x)


COTH = Fn(_coth, lambda x: 1 - _coth(x) ** 2, lambda x: -2 * _coth(x) * (1 - _coth(x) ** 2))


# ------------------------------------------------------------ operators

# centered second-order stencils for d^k/dr^k, offsets -2..2
_STENCILS = {
    0: np.array([0, 0, 1, 0, 0], dtype=float),
    1: np.array([0, -0.5, 0, 0.5, 0]),
    2: np.array([0, 1, -2, 1, 0], dtype=float),
    3: np.array([-0.5, 1, 0, -1, 0.5]),
    4: np.array([1, -4, 6, -4, 1], dtype=float),
}
OFFSETS = np.arange(-2, 3)


@dataclass
class Op:
    """Linear differential operator sum_k c_k(r) d^k/dr^k."""

    coefs: dict = field(default_factory=dict)

    @staticmethod
    def d(k: int = 1) -> Op:
        return Op({k: _coef(1.0)})

    @staticmethod
    def mul(c) -> Op:
        return Op({0: _coef(c)})

    @property
    def order(self) -> int:
        return max(self.coefs) if self.coefs else 0

    def __add__(self, other: Op) -> Op:
        out = dict(self.coefs)
        for k, c in other.coefs.items():
            out[k] = out[k] + c if k in out else c
        return Op(out)

    def __neg__(self):
        return Op({k: -c for k, c in self.coefs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar: float) -> Op:
        return Op({k: c * float(scalar) for k, c in self.coefs.items()})

    def __matmul__(self, other: Op) -> Op:
        """Composition self(other(f)), expanded by the Leibniz rule."""
        out = Op()
        for j, c in self.coefs.items():
            for k, dk in other.coefs.items():
                deriv = dk
                for i in range(j + 1):
                    out = out + Op({j - i + k: c * (math.comb(j, i) * deriv)})
                    if i < j:
                        deriv = deriv.deriv()
        return out

    def coefficients(self, r) -> dict:
        return {k: np.asarray(c(r), dtype=float) for k, c in self.coefs.items()}

    def apply_exact(self, derivs: dict, r) -> float:
        """Apply to a function given by its derivatives {k: f^(k)(r)}."""
        return float(sum(c(r) * derivs[k] for k, c in self.coefs.items()))

    def apply(self, f: Callable[[np.ndarray], np.ndarray], r: float, step: float) -> float:
        """Stencil value at r; f is evaluated on r + k*step, k = -2..2."""
        if self.order > 4:
            raise UnsupportedParameterError("stencils are available up to order 4")
        vals = np.asarray(f(r + step * OFFSETS), dtype=float)
        return self.apply_values(vals, r, step)

    def apply_values(self, vals, r: float, step: float) -> float:
        total = 0.0
        for k, c in self.coefs.items():
            total += float(c(r)) * float(_STENCILS[k] @ vals) / step ** k
        return total


D, D2 = Op.d(1), Op.d(2)


def bessel_forward(gamma: float) -> Op:
    """d^2/dr^2 - (gamma-1) d/dr (1/r)."""
    return D2 - (gamma - 1) * (D @ Op.mul(r_power(-1)))


def iterated_bessel_operator(gamma: float, variant: str = "uncorrected") -> Op:
    """Spatial side of the fourth-order equation, without the 1/8 factor.

    ``uncorrected``: outer(d^2 + (g-1)/r d + (g-1)(3-2g)/r^2).
    ``corrected``: outer(d^2 - 3(g-1)/r d + (g-1)(2g-1)/r^2), the inner factor
    whose Mellin symbol matches the density for every gamma.
    ``swapped``: the uncorrected factors in the opposite order.
    """
    g = gamma
    outer = bessel_forward(g)
    plain_inner = D2 + Op.mul(r_power(-1, g - 1)) @ D + Op.mul(r_power(-2, (g - 1) * (3 - 2 * g)))
    if variant == "uncorrected":
        return outer @ plain_inner
    if variant == "swapped":
        return plain_inner @ outer
    if variant == "corrected":
        inner = D2 + Op.mul(r_power(-1, -3 * (g - 1))) @ D + Op.mul(r_power(-2, (g - 1) * (2 * g - 1)))
        return outer @ inner
    raise DomainError(f"unknown variant {variant!r}")


def reduced_three_halves() -> Op:
    """d^4 - (3/4) d (r^-2 d)."""
    return Op.d(4) - 0.75 * (D @ Op.mul(r_power(-2)) @ D)


def jr_operator(gamma: float, with_potential: bool = True) -> Op:
    """r d^3 + 2(2-g) d^2 + (g-1)^2/r d [- (g-1)^2/r^2]."""
    g = gamma
    op = Op.mul(r_power(1)) @ Op.d(3) + 2 * (2 - g) * D2 + Op.mul(r_power(-1, (g - 1) ** 2)) @ D
    if with_potential:
        op = op - Op.mul(r_power(-2, (g - 1) ** 2))
    return op


def hyperbolic_operator(c: float, drift: Coef = COTH) -> Op:
    """d^2/deta^2 - c d/deta (drift(eta) .)."""
    return D2 - c * (D @ Op.mul(drift))


# ------------------------------------------------------------ time stencils

_T_STENCILS = {
    (1, 2): (np.array([-0.5, 0, 0.5]), 1),
    (2, 2): (np.array([1.0, -2, 1]), 1),
    (4, 2): (np.array([1.0, -4, 6, -4, 1]), 2),
    (4, 4): (np.array([-1.0, 12, -39, 56, -39, 12, -1]) / 6, 3),
}


def time_derivative(f: Callable[[float], float], t: float, step: float, order: int, accuracy: int = 2) -> float:
    w, reach = _T_STENCILS[(order, accuracy)]
    vals = np.array([f(t + k * step) for k in range(-reach, reach + 1)])
    return float(w @ vals) / step ** order


# ------------------------------------------------------------ reports

@dataclass(frozen=True)
class GridSpec:
    r_min: float
    r_max: float
    t_min: float
    t_max: float
    h_r: float
    h_t: float
    refinement_levels: int = 3
    points_r: int = 4
    points_t: int = 3

    def __post_init__(self):
        if not 0 < self.r_min <= self.r_max:
            raise DomainError("need 0 < r_min <= r_max")
        if not 0 < self.t_min <= self.t_max:
            raise DomainError("need 0 < t_min <= t_max")
        if self.refinement_levels < 2:
            raise DomainError("need at least two refinement levels")
        if not (self.h_r > 0 and self.h_t > 0):
            raise DomainError("steps must be positive")

    def nodes(self):
        return np.linspace(self.r_min, self.r_max, self.points_r), np.linspace(self.t_min, self.t_max, self.points_t)

    def steps(self):
        return [(self.h_r / 2 ** k, self.h_t / 2 ** k) for k in range(self.refinement_levels)]

    def check_fit(self, r_reach: int, t_reach: int, r_floor: float = 0.0, t_floor: float = 0.0):
        if self.r_min - r_reach * self.h_r <= r_floor or self.t_min - t_reach * self.h_t <= t_floor:
            raise DomainError("insufficient grid: the stencil leaves the domain")


@dataclass
class ResidualReport:
    law: str
    equation: str
    residual_grid: np.ndarray
    norms: tuple
    convergence_slope: float
    slope_fit_residual: float
    level_max: list
    steps: list
    notes: dict = field(default_factory=dict)

    @property
    def exact_to_rounding(self) -> bool:
        return max(self.level_max) < EXACT_FLOOR

    @property
    def passed(self) -> bool:
        converges = self.convergence_slope >= PASS_SLOPE or self.exact_to_rounding
        return bool(converges and self.norms[0] < PASS_MAX and np.all(np.isfinite(self.residual_grid)))

    def as_dict(self) -> dict:
        return dict(law=self.law, equation=self.equation, max_residual=self.norms[0], l2_residual=self.norms[1],
                    convergence_slope=self.convergence_slope, slope_fit_residual=self.slope_fit_residual,
                    level_max=list(self.level_max), steps=[list(s) for s in self.steps], passed=self.passed,
                    **self.notes)


def convergence_fit(steps, level_max):
    """Least-squares slope of log(max residual) against log(step)."""
    x = np.log([s[0] for s in steps])
    y = np.log(np.maximum(level_max, 1e-300))
    slope, icpt = np.polyfit(x, y, 1)
    fit = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return float(slope), fit


def _report(law, equation, grid: GridSpec, residual: Callable[[float, float, float, float], float], **notes):
    rs, ts = grid.nodes()
    grids = []
    for hr, ht in grid.steps():
        grids.append(np.array([[residual(r, t, hr, ht) for r in rs] for t in ts]))
    level_max = [float(np.max(np.abs(g))) for g in grids]
    slope, fit = convergence_fit(grid.steps(), level_max)
    final = grids[-1]
    norms = (level_max[-1], float(np.sqrt(np.mean(final ** 2))))
    return ResidualReport(law, equation, final, norms, slope, fit, level_max, grid.steps(), notes)


def _space(op: Op, f2, t, r, hr):
    return op.apply(lambda x: np.array([f2(float(v), t) for v in x]), r, hr)


# ------------------------------------------------------------ verifiers

ITERATED_GRID = GridSpec(1.0, 2.0, 0.75, 1.25, 0.05, 0.02, 3)


def verify_iterated_bessel_pde(gamma: float, grid: GridSpec = ITERATED_GRID, variant: str = "uncorrected",
                               method: str = "fox") -> ResidualReport:
    """dq/dt = (1/8) A B q for the iterated Bessel density, on r >= r_min > 0.

    ``variant`` selects the spatial operator (see ``iterated_bessel_operator``).
    Densities come from the Mellin-Barnes route, accurate far below the
    h^-4 amplification of the stencil.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    grid.check_fit(2, 1)
    op = (1 / 8) * iterated_bessel_operator(gamma, variant)
    if method == "fox":
        q = lambda r, t: float(mf.iterated_bessel_fox_density(gamma, r, t))
    else:
        q = lambda r, t: d.iterated_bessel_quadrature(gamma, r, t, sf.TIGHT_QUAD)

    def res(r, t, hr, ht):
        return time_derivative(lambda s: q(r, s), t, ht, 1) - _space(op, q, t, r, hr)

    return _report("iterated_bessel", f"fourth-order iterated Bessel equation ({variant})", grid, res,
                   gamma=gamma, variant=variant)


JR_GRID = GridSpec(0.5, 2.0, 0.75, 1.25, 0.0125, 0.0125, 3)


def verify_jr_pde(gamma: float, grid: GridSpec = JR_GRID, with_potential: bool = True) -> ResidualReport:
    """dq/dt + (1/2)[r q''' + 2(2-g) q'' + (g-1)^2/r q' (- (g-1)^2/r^2 q)] = 0."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    grid.check_fit(2, 1)
    op = 0.5 * jr_operator(gamma, with_potential)
    q = lambda r, t: float(d.jr_density(gamma, r, t))

    def res(r, t, hr, ht):
        return time_derivative(lambda s: q(r, s), t, ht, 1) + _space(op, q, t, r, hr)

    label = "with" if with_potential else "without"
    return _report("jr", f"third-order equation {label} the zeroth-order term", grid, res,
                   gamma=gamma, with_potential=with_potential)


LAPLACE_GRID = GridSpec(0.5, 2.0, 0.5, 2.0, 0.0125, 0.0125, 3)


def verify_laplace_type_pde(law: str, param: float | None = None, grid: GridSpec = LAPLACE_GRID,
                            convention: str = "half") -> ResidualReport:
    """-d^2q/dt^2 = k L q for laws stopped at the passage time T_t.

    ``law`` is ``bessel_at_fpt`` (param = gamma, L the Bessel forward
    operator) or ``hypJ2`` / ``hypJ3`` (L = d^2 - c d coth, c = 1, 2).
    k = 1 in the half convention and 2 in the whole convention.
    """
    grid.check_fit(2, 1)
    k = {"half": 1.0, "whole": 2.0}[convention]
    if law == "bessel_at_fpt":
        if param is None or not param > 0:
            raise DomainError("bessel_at_fpt needs gamma > 0")
        op, q = bessel_forward(param), lambda r, t: float(d.bessel_at_fpt_density(param, r, t))
        k = 1.0
    elif law == "hypJ2":
        op, q = hyperbolic_operator(1.0), lambda e, t: h.pj2_density(e, t, convention)
    elif law == "hypJ3":
        op, q = hyperbolic_operator(2.0), lambda e, t: float(h.pj3_density(e, t, convention))
    else:
        raise DomainError(f"no Laplace-type equation for {law!r}")

    def res(r, t, hr, ht):
        return -time_derivative(lambda s: q(r, s), t, ht, 2) - k * _space(op, q, t, r, hr)

    return _report(law, "Laplace-type equation in (r, t)", grid, res, param=param, convention=convention)


DRIFT_GRID = GridSpec(0.5, 1.5, 0.5, 1.5, 0.0125, 0.0125, 3)


def verify_drift_pdes(grid: GridSpec = DRIFT_GRID, mu: float = 1.0, gamma: float = 2.0,
                      composite_mu: float = 0.5) -> list[ResidualReport]:
    """Drifted passage density and the composite R(T^mu_t).

    q(t; beta): q_bb - 2 mu q_b = 2 q_t.
    q_mu(r, t): (2 mu d_t - d_t^2) q_mu = (d^2 - (g-1) d (1/r)) q_mu.
    """
    if not (mu > 0 and composite_mu > 0):
        raise DomainError("the drift equations are checked for mu > 0")
    grid.check_fit(2, 1)
    fd = lambda beta, s: float(d.drifted_fpt_density(beta, mu, s))
    beta_op = D2 - 2 * mu * D

    def res_fpt(beta, s, hr, ht):
        return _space(beta_op, fd, s, beta, hr) - 2 * time_derivative(lambda u: fd(beta, u), s, ht, 1)

    qm = lambda r, t: float(d.drifted_composite_density(gamma, composite_mu, r, t))
    op = bessel_forward(gamma)

    def res_comp(r, t, hr, ht):
        f = lambda u: qm(r, u)
        lhs = 2 * composite_mu * time_derivative(f, t, ht, 1) - time_derivative(f, t, ht, 2)
        return lhs - _space(op, qm, t, r, hr)

    return [
        _report("drifted_fpt", "drifted passage density in (beta, t)", grid, res_fpt, mu=mu),
        _report("drifted_composite", "composite with drifted clock", grid, res_comp, gamma=gamma, mu=composite_mu),
    ]


FPT_GRID = GridSpec(0.5, 2.0, 0.75, 1.5, 0.025, 0.025, 3)


def verify_iterated_fpt_pde(n: int, grid: GridSpec = FPT_GRID) -> ResidualReport:
    """d^(2^n) f/dt^(2^n) = 2^(2^n - 1) df/dx for n in {1, 2}; x plays the role of r.

    n = 2 uses the 7-point fourth-order-accurate stencil in t.
    """
    if n not in (1, 2):
        raise UnsupportedParameterError("densities are available for n in {1, 2}; use verify_iterated_fpt_laplace")
    order = 2 ** n
    accuracy = 2 if n == 1 else 4
    grid.check_fit(1, 3 if n == 2 else 1)
    if n == 1:
        f = lambda x, t: float(d.levy_density(x, t))
    else:
        f = lambda x, t: d.iterated_fpt_density(2, x, t, sf.TIGHT_QUAD)

    def res(x, t, hx, ht):
        return (time_derivative(lambda s: f(x, s), t, ht, order, accuracy)
                - 2 ** (order - 1) * _space(D, f, t, x, hx))

    return _report("iterated_fpt", f"order-{order} passage equation", grid, res, n=n)


def verify_iterated_fpt_laplace(n: int, lam: float = 1.0, t: float = 1.0) -> float:
    """Relative residual of d^(2^n)L/dt^(2^n) = 2^(2^n - 1) lam L by repeated differentiation.

    L = exp(-t a), so each derivative multiplies by -a.
    """
    if not 1 <= n <= 4:
        raise UnsupportedParameterError("n must lie in 1..4")
    a = lam ** (0.5 ** n) * 2 ** (1 - 0.5 ** n)
    value = math.exp(-t * a)
    for _ in range(2 ** n):
        value = -a * value
    rhs = 2 ** (2 ** n - 1) * lam * math.exp(-t * a)
    return abs(value - rhs) / abs(rhs)


HYP_GRID = GridSpec(0.5, 2.0, 0.5, 2.0, 0.0125, 0.0125, 3)


def verify_p2_forward_pde(grid: GridSpec = HYP_GRID, convention: str = "half") -> ResidualReport:
    """dp2/dt = k [p'' - (coth p)'], k = 1/2 (half) or 1 (whole)."""
    grid.check_fit(2, 1)
    k = {"half": 0.5, "whole": 1.0}[convention]
    op = hyperbolic_operator(1.0)
    p = lambda e, t: h.p2_density(e, t, convention, sf.TIGHT_QUAD)

    def res(e, t, he, ht):
        return time_derivative(lambda s: p(e, s), t, ht, 1) - k * _space(op, p, t, e, he)

    return _report("hyp2", "forward equation on the hyperbolic plane", grid, res, convention=convention)


def _coth_over_eta():
    f = lambda x: _coth(x) / x
    df = lambda x: (1 - _coth(x) ** 2) / x - _coth(x) / x ** 2
    return Fn(f, df)


def verify_p3_forward_pde(grid: GridSpec = HYP_GRID, convention: str = "half", drift: str = "coth") -> ResidualReport:
    """dp3/dt = k [p'' - 2 (w p)'] with w = coth, or coth(eta)/eta for ``drift="coth_over_eta"``."""
    grid.check_fit(2, 1)
    k = {"half": 0.5, "whole": 1.0}[convention]
    w = COTH if drift == "coth" else _coth_over_eta()
    op = hyperbolic_operator(2.0, w)
    p = lambda e, t: float(h.p3_density(e, t, convention))

    def res(e, t, he, ht):
        return time_derivative(lambda s: p(e, s), t, ht, 1) - k * _space(op, p, t, e, he)

    return _report("hyp3", f"forward equation in the hyperbolic half-space ({drift})", grid, res,
                   convention=convention, drift=drift)


# ------------------------------------------------------------ suite

def run_suite() -> list[ResidualReport]:
    """Every governing equation, the uncorrected variants alongside the corrected ones."""
    reports = []
    for g in (1.5, 2.0, 3.0):
        reports.append(verify_iterated_bessel_pde(g, variant="uncorrected"))
        reports.append(verify_iterated_bessel_pde(g, variant="corrected"))
    reports.append(verify_iterated_bessel_pde(1.0, variant="uncorrected"))
    for g in (1.0, 2.0, 3.0):
        reports.append(verify_jr_pde(g, with_potential=True))
        reports.append(verify_jr_pde(g, with_potential=False))
    reports.append(verify_laplace_type_pde("bessel_at_fpt", 1.0))
    reports.append(verify_laplace_type_pde("bessel_at_fpt", 3.0))
    reports.append(verify_laplace_type_pde("hypJ2"))
    reports.append(verify_laplace_type_pde("hypJ3"))
    reports.extend(verify_drift_pdes())
    reports.append(verify_iterated_fpt_pde(1))
    reports.append(verify_iterated_fpt_pde(2))
    reports.append(verify_p2_forward_pde())
    reports.append(verify_p3_forward_pde())
    reports.append(verify_p3_forward_pde(drift="coth_over_eta"))
    return reports


def negative_control(gamma: float = 2.0) -> ResidualReport:
    """The corrected operator with its two factors swapped; must not pass."""
    g = gamma
    inner = D2 + Op.mul(r_power(-1, -3 * (g - 1))) @ D + Op.mul(r_power(-2, (g - 1) * (2 * g - 1)))
    op = (1 / 8) * (inner @ bessel_forward(g))
    q = lambda r, t: float(mf.iterated_bessel_fox_density(g, r, t))

    def res(r, t, hr, ht):
        return time_derivative(lambda s: q(r, s), t, ht, 1) - _space(op, q, t, r, hr)

    return _report("iterated_bessel", "fourth-order equation with swapped factors", ITERATED_GRID, res,
                   gamma=g, variant="swapped")
