"""Special-function kernel: modified Bessel functions, Mittag-Leffler, and
the Bessel-K integral representation used as a quadrature oracle.

Everything is double precision.  ``bessel_k`` follows Temme's series for
small arguments and Steed's continued fraction otherwise, with upward
recurrence in the order; ``bessel_i`` sums the power series around its
largest term and switches to the large-argument expansion when that is
cheaper.  Quadrature is delegated to QUADPACK through ``scipy.integrate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NumericalError, RangeError

EPS = np.finfo(float).eps
_LOG_MAX = math.log(np.finfo(float).max)
_RESCALE = 1e250


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances shared by every quadrature in the package.

    ``truncation_threshold`` is the integrand-to-peak ratio below which
    tails of log-concave integrands are cut.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    truncation_threshold: float = 1e-20

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be at least 16")
        if not 0 < self.truncation_threshold < 1:
            raise ValueError("truncation_threshold must lie in (0, 1)")

    def tightened(self, rel_tol=1e-12, abs_tol=1e-15):
        return QuadratureConfig(rel_tol, abs_tol, max(self.max_subdivisions, 400),
                                min(self.truncation_threshold, 1e-24))


DEFAULT_QUAD = QuadratureConfig()
TIGHT_QUAD = DEFAULT_QUAD.tightened()


def quad(f, a, b, cfg: QuadratureConfig = DEFAULT_QUAD, points=None, **kwargs):
    """Adaptive quadrature with an error check.

    Returns ``(value, abserr)``.  Raises NumericalError when QUADPACK gives
    up with an error estimate well above the requested tolerance.
    """
    res = integrate.quad(f, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                         limit=cfg.max_subdivisions, points=points, full_output=1, **kwargs)
    val, err = float(res[0]), float(res[1])
    if not math.isfinite(val):
        raise NumericalError("quadrature produced a non-finite value", estimate=err)
    if len(res) > 3:
        allowed = 100.0 * max(cfg.abs_tol, cfg.rel_tol * abs(val))
        if not err <= allowed:
            raise NumericalError(f"quadrature did not converge: {res[3]}", estimate=err)
    return val, err


def quad_log(f, a: float, b: float = math.inf, cfg: QuadratureConfig = DEFAULT_QUAD,
             span: float = 240.0):
    """Integral of f over [a, b] with 0 < a, taken in y = log x.

    Algebraic decay x^-p becomes e^-(p-1)y, which QUADPACK handles far better
    than long linear panels or the infinite-range map.  An infinite ``b`` is
    replaced by a * e^span.
    """
    if not 0 < a:
        raise DomainError("quad_log needs a positive lower limit")
    if not b > a:
        return 0.0, 0.0
    la = math.log(a)
    lb = min(math.log(b), la + span) if math.isfinite(b) else la + span
    g = lambda y: f(math.exp(y)) * math.exp(y)
    edges = [la] + [la + k for k in (1.0, 3.0, 10.0, 30.0, 100.0) if la + k < lb] + [lb]
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = quad(g, lo, hi, cfg)
        total += v
        err += e
    return total, err


class LogQuad(NamedTuple):
    """Integral represented as ``exp(log_scale) * value``."""

    log_scale: float
    value: float
    abserr: float

    @property
    def log(self):
        return self.log_scale + math.log(self.value)

    def __float__(self):
        return math.exp(self.log)


def _bracket_root(g, y0, step, direction, max_iter=200):
    """Walk from y0 in ``direction`` until g changes sign; return bracket."""
    a, ga = y0, g(y0)
    h = step
    for _ in range(max_iter):
        b = a + direction * h
        gb = g(b)
        if ga * gb <= 0:
            return (a, b) if a < b else (b, a)
        a, ga = b, gb
        h *= 1.6
    raise NumericalError("could not bracket a root")


_LOG_TINY = -800.0


def log_integral(h: Callable[[float], float], mode: float | None = None,
                 dh: Callable[[float], float] | None = None, scale: float = 1.0,
                 cfg: QuadratureConfig = DEFAULT_QUAD) -> LogQuad:
    """Integrate ``exp(h(y))`` over the real line for a unimodal ``h``.

    The peak is located (from ``dh`` when given), the window where the
    integrand exceeds ``truncation_threshold`` times the peak is found, and
    the rescaled integrand is integrated on that window.  ``scale`` is a
    rough width of the peak used only to start the searches.
    """
    if mode is None:
        if dh is not None:
            lo, hi = _bracket_root(dh, 0.0, scale, 1 if dh(0.0) > 0 else -1)
            mode = optimize.brentq(dh, lo, hi, xtol=1e-14, rtol=4 * EPS)
        else:
            res = optimize.minimize_scalar(lambda y: -h(y), bracket=(-scale, scale))
            mode = float(res.x)
    hmax = h(mode)
    if not math.isfinite(hmax):
        raise NumericalError("log-integrand is not finite at its peak")
    if hmax < _LOG_TINY:
        # far below the double range: the rescaled integrand loses all
        # relative precision, so fall back to the Laplace approximation
        step = 1e-3 * scale
        curv = (2 * hmax - h(mode + step) - h(mode - step)) / (step * step)
        if not curv > 0:
            raise NumericalError("log-integrand has no usable curvature at its peak")
        return LogQuad(hmax, math.sqrt(2 * math.pi / curv), math.nan)
    cut = math.log(cfg.truncation_threshold)
    g = lambda y: h(y) - hmax - cut
    lo = optimize.brentq(g, *_bracket_root(g, mode, 0.5 * scale, -1), xtol=1e-10)
    hi = optimize.brentq(g, *_bracket_root(g, mode, 0.5 * scale, 1), xtol=1e-10)
    val, err = quad(lambda y: math.exp(h(y) - hmax), lo, hi, cfg, points=[mode])
    return LogQuad(hmax, val, err)


# ------------------------------------------------------------------ Bessel I

def bessel_i_switch_point(nu: float) -> float:
    """Argument above which the large-z expansion replaces the series."""
    return max(30.0, 1.2 * nu * nu)


def _bessel_i_series(nu: float, z: float, scaled: bool = False) -> float:
    # sum around the largest term so no intermediate value overflows
    q = 0.25 * z * z
    kmax = max(0, int(0.5 * (-nu + math.sqrt(nu * nu + z * z))))
    logt = (nu + 2 * kmax) * math.log(0.5 * z) - math.lgamma(kmax + 1) - math.lgamma(kmax + nu + 1)
    total, term = 1.0, 1.0
    k = kmax
    while True:
        term *= q / ((k + 1) * (k + 1 + nu))
        total += term
        k += 1
        if term < EPS * 0.1 * total:
            break
    term = 1.0
    k = kmax
    while k > 0:
        term *= k * (k + nu) / q
        total += term
        k -= 1
        if term < EPS * 0.1 * total:
            break
    shift = logt - (z if scaled else 0.0)
    return total * math.exp(shift) if shift < _LOG_MAX else math.inf


def _bessel_i_asymptotic(nu: float, z: float, scaled: bool = False) -> float:
    mu = 4.0 * nu * nu
    total, term = 1.0, 1.0
    for k in range(1, 400):
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        if abs(new) > abs(term):
            break
        term = new
        total += term
        if abs(term) < EPS * 0.1 * abs(total):
            break
    val = total / math.sqrt(2 * math.pi * z)
    if scaled:
        return val
    if z > _LOG_MAX + 10:
        return math.inf
    return val * math.exp(z)


def _bessel_i_scalar(nu: float, z: float, scaled: bool) -> float:
    if z == 0.0:
        if nu == 0.0:
            return 1.0
        return 0.0 if nu > 0 else math.inf
    if z >= bessel_i_switch_point(nu):
        return _bessel_i_asymptotic(nu, z, scaled)
    return _bessel_i_series(nu, z, scaled)


def bessel_i(nu, z, scaled: bool = False):
    """Modified Bessel function of the first kind ``I_nu(z)``.

    Defined for ``nu > -1`` and ``z >= 0``.  With ``scaled=True`` returns
    ``exp(-z) I_nu(z)``, which never overflows.
    """
    nu = float(nu)
    if not nu > -1:
        raise DomainError("bessel_i requires nu > -1")
    zarr = np.asarray(z, dtype=float)
    if np.any(zarr < 0) or np.any(np.isnan(zarr)):
        raise DomainError("bessel_i requires z >= 0")
    out = np.array([_bessel_i_scalar(nu, float(v), scaled) for v in zarr.ravel()]).reshape(zarr.shape)
    if not scaled and np.any(np.isinf(out) & (zarr > 0) & (nu >= 0)):
        raise RangeError("I_nu(z) overflows double precision; use scaled=True")
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------------ Bessel K

# Taylor coefficients of 1/Gamma(1+x) about 0
_RGAMMA1 = (
    1.0, 0.5772156649015329, -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915, -0.0421977345555443, -0.0096219715278770,
    0.0072189432466630, -0.0011651675918591, -0.0002152416741149,
    0.0001280502823882, -0.0000201348547807, -0.0000012504934821,
    0.0000011330272320, -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075, -0.0000000011812746, 0.0000000001043427,
    0.0000000000077823, -0.0000000000036968, 0.0000000000005100,
    -0.0000000000000206, -0.0000000000000054, 0.0000000000000014,
    0.0000000000000001,
)


def _temme_gammas(mu: float):
    """Return gam1 = (1/G(1-mu) - 1/G(1+mu))/(2 mu), gam2 = their mean."""
    odd = 0.0
    even = 0.0
    for j in range(len(_RGAMMA1) - 1, -1, -1):
        if j % 2:
            odd = odd * mu * mu + _RGAMMA1[j]
        else:
            even = even * mu * mu + _RGAMMA1[j]
    return -odd, even


def _k_pair_scaled(mu: float, x: float):
    """exp(x) K_mu(x) and exp(x) K_{mu+1}(x) for |mu| <= 1/2."""
    if x < 2.0:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < EPS else math.sinh(e) / e
        gam1, gam2 = _temme_gammas(mu)
        gampl = gam2 - mu * gam1
        gammi = gam2 + mu * gam1
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        s = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        s1 = p
        for i in range(1, 10000):
            ff = (i * ff + p + q) / (i * i - mu * mu)
            c *= d / i
            p /= i - mu
            q /= i + mu
            dl = c * ff
            s += dl
            s1 += c * (p - i * ff)
            if abs(dl) < abs(s) * EPS:
                break
        else:
            raise NumericalError("Temme series did not converge")
        ex = math.exp(x)
        return s * ex, s1 * (2.0 / x) * ex
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 100000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < EPS:
            break
    else:
        raise NumericalError("continued fraction for K did not converge")
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1


def _k_scaled_scalar(nu: float, x: float):
    """exp(x) K_nu(x) as ``(mantissa, log_shift)``."""
    nu = abs(nu)
    nl = int(nu + 0.5)
    mu = nu - nl
    kmu, k1 = _k_pair_scaled(mu, x)
    shift = 0.0
    xi2 = 2.0 / x
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * xi2 * k1 + kmu
        if k1 > _RESCALE:
            kmu /= _RESCALE
            k1 /= _RESCALE
            shift += math.log(_RESCALE)
    return kmu, shift


def _log_k_scalar(nu: float, x: float) -> float:
    m, shift = _k_scaled_scalar(nu, x)
    return math.log(m) + shift - x


def _k_scalar(nu: float, x: float, scaled: bool) -> float:
    m, shift = _k_scaled_scalar(nu, x)
    if shift == 0.0 and scaled:
        return m
    logv = math.log(m) + shift - (0.0 if scaled else x)
    if logv > _LOG_MAX:
        raise RangeError("K_nu(x) overflows double precision; use log_bessel_k")
    return math.exp(logv)


def bessel_k(nu, z, scaled: bool = False):
    """Modified Bessel function of the second kind ``K_nu(z)``, ``z > 0``.

    ``K_{-nu} = K_nu``.  With ``scaled=True`` returns ``exp(z) K_nu(z)``.
    """
    nu = float(nu)
    if not math.isfinite(nu):
        raise DomainError("order must be finite")
    zarr = np.asarray(z, dtype=float)
    if np.any(~(zarr > 0)):
        raise DomainError("bessel_k requires z > 0")
    if zarr.ndim == 0:
        return _k_scalar(nu, float(zarr), scaled)
    return np.array([_k_scalar(nu, float(v), scaled) for v in zarr.ravel()]).reshape(zarr.shape)


def log_bessel_k(nu: float, z: float) -> float:
    """Natural logarithm of ``K_nu(z)``, finite far outside double range."""
    if not z > 0:
        raise DomainError("bessel_k requires z > 0")
    return _log_k_scalar(float(nu), float(z))


# ------------------------------------------------------------ master integral

class MasterIntegral(NamedTuple):
    quadrature: float
    closed_form: float
    abserr: float


def master_integral_pair(nu, p, beta, gamma, cfg: QuadratureConfig = DEFAULT_QUAD) -> MasterIntegral:
    """Both routes for ``int_0^inf x^(nu-1) exp(-beta x^p - gamma x^-p) dx``.

    The quadrature runs in ``y = log x`` where the integrand is log-concave;
    the closed form is ``(2/p) (gamma/beta)^(nu/2p) K_{nu/p}(2 sqrt(gamma beta))``.
    """
    nu, p, beta, gamma = (float(v) for v in (nu, p, beta, gamma))
    if not (nu > 0 and p > 0 and beta > 0 and gamma > 0):
        raise DomainError("master integral needs all parameters positive")
    z = (nu + math.sqrt(nu * nu + 4 * p * p * beta * gamma)) / (2 * p * beta)
    mode = math.log(z) / p
    h = lambda y: nu * y - beta * math.exp(p * y) - gamma * math.exp(-p * y)
    width = 1.0 / math.sqrt(p * p * (beta * z + gamma / z))
    lq = log_integral(h, mode=mode, scale=width, cfg=cfg)
    log_closed = (math.log(2 / p) + nu / (2 * p) * math.log(gamma / beta)
                  + _log_k_scalar(nu / p, 2 * math.sqrt(gamma * beta)))
    if max(lq.log, log_closed) > _LOG_MAX:
        raise RangeError("master integral exceeds double range")
    q = math.exp(lq.log)
    return MasterIntegral(q, math.exp(log_closed), q * lq.abserr / lq.value)


def master_integral(nu, p, beta, gamma, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Quadrature value of the Bessel-K integral, checked against its closed form."""
    res = master_integral_pair(nu, p, beta, gamma, cfg)
    gap = abs(res.quadrature - res.closed_form)
    if gap > 10 * cfg.rel_tol * res.closed_form + res.abserr:
        raise NumericalError("quadrature and closed form disagree", estimate=gap)
    return res.quadrature


# ------------------------------------------------------------- Mittag-Leffler

def _ml_series(alpha, beta, z):
    total = 0.0
    biggest = 0.0
    k = 0
    logabs = math.log(abs(z))
    while True:
        g = alpha * k + beta
        rg = float(special.rgamma(g))
        if rg == 0.0:
            term = 0.0
        else:
            lt = k * logabs - float(special.gammaln(g))
            if lt > 700:
                return math.nan, math.inf
            term = math.copysign(math.exp(lt), rg) * (1 if z >= 0 or k % 2 == 0 else -1)
        total += term
        biggest = max(biggest, abs(term))
        if k > 5 and abs(term) < EPS * 0.01 * max(abs(total), 1e-300) and alpha * k + beta > abs(z) ** (1 / alpha):
            break
        k += 1
        if k > 5000:
            raise NumericalError("Mittag-Leffler series did not converge")
    return total, biggest


def _ml_lamperti(alpha, y, cfg):
    # E_alpha(-y) as the Laplace transform of the Lamperti ratio law
    s = y ** (1.0 / alpha)
    sa, ca = math.sin(math.pi * alpha), math.cos(math.pi * alpha)

    def f(u):
        x = u / s
        xa = x ** alpha
        return math.exp(-u) * sa / math.pi * xa / x / (xa * xa + 1 + 2 * xa * ca) / s

    a, e1 = quad(f, 0, 1, cfg)
    b, e2 = quad(f, 1, math.inf, cfg)
    return a + b


def mittag_leffler(alpha: float, beta: float, z: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Two-parameter Mittag-Leffler function ``sum_k z^k / Gamma(alpha k + beta)``.

    The series is used while it is numerically safe.  For negative
    arguments beyond that, ``beta = 1`` with ``0 < alpha < 1`` uses the
    positive Lamperti integral and ``alpha = 1`` uses an incomplete-gamma
    type integral; other combinations raise NumericalError.
    """
    alpha, beta, z = float(alpha), float(beta), float(z)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if alpha == 1.0 and beta == 1.0:
        return math.exp(z)
    if z == 0.0:
        return float(special.rgamma(beta))
    if abs(z) <= 60:
        total, biggest = _ml_series(alpha, beta, z)
        if biggest * EPS <= 1e-12 * max(abs(total), 1e-300):
            return total
    if z < 0 and beta == 1.0 and alpha < 1.0:
        return _ml_lamperti(alpha, -z, cfg)
    if z < 0 and alpha == 1.0:
        y = -z
        if beta > 1.0:
            val, _ = quad(lambda s: (1 - s) ** (beta - 2) * math.exp(-y * s), 0, 1, cfg)
            return val * float(special.rgamma(beta - 1))
        return float(special.rgamma(beta)) - y * mittag_leffler(1.0, beta + 1.0, z, cfg)
    raise NumericalError("Mittag-Leffler series is not accurate at this argument")


def mittag_leffler_e1nu(nu: float, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Mittag-Leffler function of index ``nu`` with unit second parameter.

    ``sum_k x^k / Gamma(nu k + 1)``, the Laplace transform of the ratio of
    two independent positive ``nu``-stable variables evaluated at
    ``lambda^(1/nu) t`` with ``x = -lambda t^nu``.
    """
    if not 0 < nu <= 1:
        raise DomainError("nu must lie in (0, 1]")
    if x > 0:
        raise DomainError("argument must be non-positive")
    return mittag_leffler(nu, 1.0, x, cfg)
