"""Named laws as ``DensityFn`` objects, shared by the samplers, suites and CLI."""

from __future__ import annotations

import math
from functools import partial

import numpy as np

from . import densities as d
from .densities import DensityFn
from .errors import DomainError, NumericalError, UnsupportedParameterError
from .special_fn import DEFAULT_QUAD, QuadratureConfig

INF = math.inf


def _need(params, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise DomainError(f"missing parameter(s): {', '.join(missing)}")
    return [float(params[n]) if n != "n" else int(params[n]) for n in names]


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DomainError(f"{k} must be positive, got {v}")


def _nu(nu, allow_one=False):
    if not (0 < nu < 1 or (allow_one and nu == 1)):
        raise DomainError("nu must lie in (0, 1)")


def _bessel_transition(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    x = float(p.get("x") or 0.0)
    _positive(gamma=gamma, t=t)
    if x < 0:
        raise DomainError("x must be nonnegative")
    pdf = lambda r: _scalar_or_map(lambda v: d.bessel_transition(gamma, x, v, t), r)
    return DensityFn("bessel_transition", dict(gamma=gamma, x=x, t=t), (0.0, INF), pdf,
                     partial(d.bessel_transition_cdf, gamma, x, t=t),
                     convergence_strip=(1 - gamma, INF), scale=math.sqrt(t) + x)


def _scalar_or_map(f, r):
    ra = np.asarray(r, dtype=float)
    if ra.ndim == 0:
        return f(float(ra))
    return np.array([f(float(v)) for v in ra.ravel()]).reshape(ra.shape)


def _iterated_bessel(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    method = p.get("method") or "quadrature"
    if method not in ("quadrature", "fox"):
        raise DomainError("method must be 'quadrature' or 'fox'")
    pdf = lambda r: d.iterated_bessel_density(gamma, r, t, method, cfg)
    return DensityFn("iterated_bessel", dict(gamma=gamma, t=t, method=method), (0.0, INF), pdf,
                     lambda r: d.iterated_bessel_cdf(gamma, r, t, cfg), vectorized=False,
                     convergence_strip=(1 - gamma, INF), scale=(8 * t) ** 0.25, nested=True,
                     table_pdf_fn=lambda r: d.iterated_bessel_quadrature(gamma, r, t, cfg))


def _jr(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    return DensityFn("jr", dict(gamma=gamma, t=t), (0.0, INF), partial(d.jr_density, gamma, t=t),
                     lambda r: d.jr_cdf(gamma, r, t, cfg), vectorized=False,
                     convergence_strip=(1 - gamma, INF), scale=math.sqrt(t))


def _bessel_at_fpt(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    return DensityFn("bessel_at_fpt", dict(gamma=gamma, t=t), (0.0, INF),
                     partial(d.bessel_at_fpt_density, gamma, t=t), partial(d.bessel_at_fpt_cdf, gamma, t=t),
                     convergence_strip=(1 - gamma, 2.0), scale=t)


def _hat_r(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    return DensityFn("hat_r", dict(gamma=gamma, t=t), (0.0, 1.0), partial(d.hat_r_density, gamma, t=t),
                     partial(d.hat_r_cdf, gamma, t=t), convergence_strip=(0.0, INF), scale=1.0)


def _beta_arcsin(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    return DensityFn("beta_arcsin", dict(gamma=gamma, t=t), (0.0, t),
                     partial(d.beta_arcsin_density, gamma, t=t), partial(d.beta_arcsin_cdf, gamma, t=t),
                     convergence_strip=(0.5, INF), scale=t)


def _inverse_bessel_at_fpt(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    return DensityFn("inverse_bessel_at_fpt", dict(gamma=gamma, t=t), (0.0, INF),
                     partial(d.inverse_bessel_at_fpt_density, gamma, t=t),
                     partial(d.inverse_bessel_at_fpt_cdf, gamma, t=t),
                     convergence_strip=(0.0, gamma + 1), scale=1 / t)


def _inverted_composition(p, cfg):
    gamma, t = _need(p, "gamma", "t")
    _positive(gamma=gamma, t=t)
    return DensityFn("inverted_composition", dict(gamma=gamma, t=t), (0.0, INF),
                     partial(d.inverted_composition_density, gamma, t=t),
                     partial(d.inverted_composition_cdf, gamma, t=t),
                     convergence_strip=(1 - gamma / 2, 1.5), scale=t)


def _stable_ratio(p, cfg):
    (nu,) = _need(p, "nu")
    _nu(nu)
    return DensityFn("stable_ratio", dict(nu=nu), (0.0, INF), partial(d.stable_ratio_density, nu),
                     partial(d.stable_ratio_cdf, nu), convergence_strip=(1 - nu, 1 + nu))


def _fpt(p, cfg):
    (t,) = _need(p, "t")
    _positive(t=t)
    return DensityFn("fpt", dict(t=t), (0.0, INF), partial(d.levy_density, t=t), partial(d.levy_cdf, t=t),
                     convergence_strip=(-INF, 1.5), scale=t * t)


def _drifted_fpt(p, cfg):
    beta, mu = _need(p, "t", "mu")
    _positive(t=beta)
    if mu < 0:
        raise UnsupportedParameterError("the drifted passage law is defective for mu < 0")
    if mu == 0:
        return _fpt(dict(t=beta), cfg)
    return DensityFn("drifted_fpt", dict(t=beta, mu=mu), (0.0, INF),
                     lambda s: d.drifted_fpt_density(beta, mu, s), lambda s: d.drifted_fpt_cdf(beta, mu, s),
                     convergence_strip=(-INF, INF), scale=beta / mu)


def _drifted_composite(p, cfg):
    gamma, mu, t = _need(p, "gamma", "mu", "t")
    _positive(gamma=gamma, t=t)
    if mu < 0:
        raise UnsupportedParameterError("the drifted composite law is stated for mu >= 0")
    if mu == 0:
        return _bessel_at_fpt(dict(gamma=gamma, t=t), cfg)
    return DensityFn("drifted_composite", dict(gamma=gamma, mu=mu, t=t), (0.0, INF),
                     partial(d.drifted_composite_density, gamma, mu, t=t),
                     lambda r: d.drifted_composite_cdf(gamma, mu, r, t, cfg), vectorized=False,
                     convergence_strip=(1 - gamma, INF), scale=math.sqrt(t / mu + t * t))


def _iterated_fpt(p, cfg):
    n, t = _need(p, "n", "t")
    _positive(t=t)
    if n == 1:
        return _fpt(dict(t=t), cfg)
    if n != 2:
        raise UnsupportedParameterError("densities are available for n in {1, 2}")
    return DensityFn("iterated_fpt", dict(n=2, t=t), (0.0, INF),
                     lambda x: d.iterated_fpt_density(2, x, t, cfg), lambda x: d.iterated_fpt_cdf(2, x, t, cfg),
                     vectorized=False, convergence_strip=(-INF, 1.25), scale=t ** 4, nested=True,
                     table_span=1e24)


def _cauchy_at_stable(p, cfg):
    nu, t = _need(p, "nu", "t")
    _nu(nu, allow_one=True)
    _positive(t=t)
    return DensityFn("cauchy_at_stable", dict(nu=nu, t=t), (-INF, INF),
                     lambda x: d.cauchy_at_stable_density(nu, x, t), lambda x: d.cauchy_at_stable_cdf(nu, x, t),
                     vectorized=False, convergence_strip=(0.0, 1 + nu), scale=t ** (1 / nu), nested=True)


def _hyperbolic(kind, p, cfg):
    from . import hyperbolic as h
    (t,) = _need(p, "t")
    _positive(t=t)
    conv = p.get("convention") or "half"
    if conv not in h.CONVENTIONS:
        raise DomainError(f"convention must be one of {h.CONVENTIONS}")
    params = dict(t=t, convention=conv)
    if kind == "hyp3":
        tt = h.plain_time(t, conv)
        return DensityFn("hyp3", params, (0.0, INF), lambda e: h.p3_density(e, t, conv),
                         lambda e: h.p3_cdf(e, t, conv), convergence_strip=(-2.0, INF), scale=tt + math.sqrt(tt))
    if kind == "hyp2":
        tt = h.plain_time(t, conv)
        return DensityFn("hyp2", params, (0.0, INF), lambda e: h.p2_density(e, t, conv, cfg),
                         lambda e: h.p2_cdf(e, t, conv, cfg), vectorized=False,
                         convergence_strip=(-1.0, INF), scale=0.5 * tt + math.sqrt(tt), nested=True)
    ts = h.stopped_time(t, conv)
    if kind == "hypJ3":
        return DensityFn("hypJ3", params, (0.0, INF), lambda e: h.pj3_density(e, t, conv),
                         lambda e: h.pj3_cdf(e, t, conv, cfg), vectorized=False,
                         convergence_strip=(-2.0, 1.5), scale=ts + ts * ts)
    if kind == "hypJ2":
        return DensityFn("hypJ2", params, (0.0, INF), lambda e: h.pj2_density(e, t, conv, cfg=cfg),
                         lambda e: h.pj2_cdf(e, t, conv, cfg), vectorized=False,
                         convergence_strip=(-1.0, 1.5), scale=ts + ts * ts, nested=True)
    raise KeyError(kind)


LAWS = {
    "bessel_transition": _bessel_transition,
    "iterated_bessel": _iterated_bessel,
    "jr": _jr,
    "bessel_at_fpt": _bessel_at_fpt,
    "hat_r": _hat_r,
    "beta_arcsin": _beta_arcsin,
    "inverse_bessel_at_fpt": _inverse_bessel_at_fpt,
    "inverted_composition": _inverted_composition,
    "stable_ratio": _stable_ratio,
    "fpt": _fpt,
    "drifted_fpt": _drifted_fpt,
    "drifted_composite": _drifted_composite,
    "iterated_fpt": _iterated_fpt,
    "cauchy_at_stable": _cauchy_at_stable,
    "hyp2": partial(_hyperbolic, "hyp2"),
    "hyp3": partial(_hyperbolic, "hyp3"),
    "hypJ2": partial(_hyperbolic, "hypJ2"),
    "hypJ3": partial(_hyperbolic, "hypJ3"),
}


def law(law_id: str, cfg: QuadratureConfig = DEFAULT_QUAD, validate: bool = False, **params) -> DensityFn:
    """Build the DensityFn for ``law_id`` with keyword parameters.

    With ``validate=True`` the total mass is checked by quadrature and a
    NumericalError is raised when it is off by more than 1e-5.
    """
    try:
        builder = LAWS[law_id]
    except KeyError:
        raise DomainError(f"unknown law {law_id!r}; choose from {sorted(LAWS)}") from None
    f = builder(params, cfg)
    if validate:
        mass = f.normalization(cfg)
        if abs(mass - 1) > 1e-5:
            raise NumericalError(f"{law_id} has mass {mass}", estimate=abs(mass - 1))
    return f
