"""Statistical comparisons: KS tests, moment estimates and Monte Carlo identity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import densities as d
from . import hyperbolic as h
from . import mellin_fox as mf
from .errors import DataError, DomainError
from .registry import law
from .samplers import (ProcessSpec, RngState, SampleBatch, compose, draw, sample, sample_bessel_at,
                       sample_cauchy, sample_fpt, sample_stable_subordinator, spawn_seeds)

MIN_N = 100


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int
    reference: str


@dataclass(frozen=True)
class MomentEstimate:
    order: float
    estimate: float
    std_error: float
    n: int
    finite_variance: bool = True

    def z_score(self, reference: float) -> float:
        return (self.estimate - reference) / self.std_error


def _values(batch) -> np.ndarray:
    v = np.asarray(batch.values if isinstance(batch, SampleBatch) else batch, dtype=float).ravel()
    if np.any(np.isnan(v)):
        raise DataError("sample contains NaN")
    if v.size < MIN_N:
        raise DataError(f"need at least {MIN_N} samples, got {v.size}")
    return np.sort(v)


def kolmogorov_pvalue(statistic: float, n_eff: float) -> float:
    """Asymptotic Kolmogorov tail at the finite-n scaled statistic."""
    s = math.sqrt(n_eff)
    return float(np.clip(special.kolmogorov((s + 0.12 + 0.11 / s) * statistic), 0.0, 1.0))


def ks_one_sample(batch, cdf, reference: str | None = None) -> KsResult:
    """One-sample KS against a DensityFn or a vectorized CDF callable."""
    x = _values(batch)
    n = x.size
    fn = cdf.cdf if hasattr(cdf, "cdf") else cdf
    F = np.clip(np.asarray(fn(x), dtype=float), 0.0, 1.0)
    if np.any(np.isnan(F)):
        raise DataError("reference CDF returned NaN")
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))
    ref = reference or getattr(cdf, "law", getattr(cdf, "__name__", "cdf"))
    return KsResult(stat, kolmogorov_pvalue(stat, n), n, ref)


def ks_two_sample(a, b) -> KsResult:
    x, y = _values(a), _values(b)
    n, m = x.size, y.size
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / n
    fy = np.searchsorted(y, grid, side="right") / m
    stat = float(np.max(np.abs(fx - fy)))
    return KsResult(stat, kolmogorov_pvalue(stat, n * m / (n + m)), min(n, m), "two-sample")


def empirical_cdf(values, x):
    v = _values(values)
    return np.searchsorted(v, np.asarray(x, dtype=float), side="right") / v.size


# ------------------------------------------------------------ moments

def moment_strip(spec: ProcessSpec) -> tuple:
    """Open interval of eta where E X^(eta-1) is finite for the law of ``spec``."""
    k, g, nu = spec.kind, spec.gamma, spec.nu
    inf = math.inf
    table = {
        "BesselAtT": lambda: (1 - g, inf),
        "IteratedBessel": lambda: (1 - g, inf),
        "JRSquaredClock": lambda: (1 - g, inf),
        "FPT": lambda: (-inf, 1.5),
        "DriftedFPT": lambda: (-inf, inf) if spec.mu > 0 else (-inf, 1.5),
        "IteratedFPT": lambda: (-inf, 1 + 0.5 ** spec.depth),
        "StableSubordinator": lambda: (-inf, 1 + nu),
        "Cauchy": lambda: (0.0, 2.0),
        "BesselAtFPT": lambda: (1 - g, 2.0),
        "BesselAtDriftedFPT": lambda: (1 - g, inf) if spec.mu > 0 else (1 - g, 2.0),
        "TRgamma": lambda: (1 - g / 2, 1.5),
        "StableRatio": lambda: (1 - nu, 1 + nu),
        "CauchyAtStable": lambda: (0.0, 1 + nu),
        "HypDistanceH2": lambda: (-1.0, inf),
        "HypDistanceH3": lambda: (-2.0, inf),
        "HypH2AtFPT": lambda: (-1.0, 1.5),
        "HypH3AtFPT": lambda: (-2.0, 1.5),
    }
    return table[k]()


def moment_estimate(batch: SampleBatch, order: float, strip: tuple | None = None) -> MomentEstimate:
    """Sample mean of |x|^order with its plain standard error.

    Refused when the moment does not exist.  When the moment of order
    2*order does not exist the estimate is returned with
    ``finite_variance=False``: its standard error is then only indicative.
    """
    lo, hi = strip if strip is not None else moment_strip(batch.spec)
    if not lo < order + 1 < hi:
        raise DomainError(f"moment of order {order} does not exist; estimate refused")
    v = np.abs(_values(batch)) ** order
    n = v.size
    se = float(np.std(v, ddof=1) / math.sqrt(n))
    if not se > 0:
        raise DataError("degenerate sample: zero spread")
    return MomentEstimate(order, float(np.mean(v)), se, n, lo < 2 * order + 1 < hi)


def mean_estimate(values) -> MomentEstimate:
    """Mean and standard error of an arbitrary statistic already evaluated per draw."""
    v = np.asarray(values, dtype=float)
    if np.any(np.isnan(v)):
        raise DataError("sample contains NaN")
    return MomentEstimate(1.0, float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), v.size)


# ------------------------------------------------------------ identity checks

@dataclass
class CheckResult:
    name: str
    identity: str
    passed: bool
    value: float
    reference: float
    tolerance: str
    detail: dict = field(default_factory=dict)
    informational: bool = False


def _ks_check(name, identity, res: KsResult, alpha=0.01, **detail):
    return CheckResult(name, identity, res.p_value > alpha, res.statistic, res.p_value,
                       f"p > {alpha}", dict(p_value=res.p_value, n=res.n, **detail))


def _sigma_check(name, identity, est: MomentEstimate, ref: float, k=3.0, **detail):
    z = est.z_score(ref)
    return CheckResult(name, identity, abs(z) < k, est.estimate, ref, f"{k} sigma",
                       dict(std_error=est.std_error, z=z, n=est.n, **detail))


def _rng(seed, i=0):
    return RngState(spawn_seeds(seed, i + 1)[i])


def _rngs(seed, k):
    return [RngState(s) for s in spawn_seeds(seed, k)]


def _law_ks(name, identity, spec, ref_law, seed, n):
    b = sample(spec, n, seed)
    return _ks_check(name, identity, ks_one_sample(b, ref_law))


def check_folded_cauchy(seed: int, n: int = 100_000) -> CheckResult:
    b = sample(ProcessSpec("BesselAtFPT", gamma=1.0, t=1.0), n, seed)
    res = ks_one_sample(b, lambda r: 2 / math.pi * np.arctan(r), "folded Cauchy")
    return _ks_check("folded_cauchy", "R^1(T_1) is folded Cauchy", res)


def check_composition_swap(seed: int, n: int = 100_000, gamma: float = 2.0, t: float = 1.0) -> CheckResult:
    ra, rb = _rngs(seed, 2)
    level = sample_bessel_at(gamma, t * t, ra, n)
    a = np.sqrt(compose(ProcessSpec("FPT"), level, ra))
    b = draw(ProcessSpec("BesselAtFPT", gamma=gamma, t=t), rb, n)
    return _ks_check("composition_swap", "sqrt(T at level R(t^2)) equals R(T_t) in law",
                     ks_two_sample(a, b), gamma=gamma, t=t)


def check_passage_of_bessel_one(seed: int, n: int = 100_000, t: float = 1.0) -> CheckResult:
    ra, rb = _rngs(seed, 2)
    a = draw(ProcessSpec("TRgamma", gamma=1.0, t=t), ra, n)
    b = sample_cauchy(math.sqrt(t), rb, n) ** 2
    return _ks_check("passage_of_bessel_one", "T at level R^1(t) equals C(sqrt t)^2 in law",
                     ks_two_sample(a, b), t=t)


def check_passage_of_bessel(seed: int, n: int = 100_000, gamma: float = 2.0, t: float = 1.0) -> CheckResult:
    ra, rb = _rngs(seed, 2)
    a = draw(ProcessSpec("TRgamma", gamma=gamma, t=t), ra, n)
    b = draw(ProcessSpec("BesselAtFPT", gamma=gamma, t=math.sqrt(t)), rb, n) ** 2
    return _ks_check("passage_of_bessel", "T at level R(t) equals R(T_sqrt(t))^2 in law",
                     ks_two_sample(a, b), gamma=gamma, t=t)


def check_stable_half_is_passage(seed: int, n: int = 100_000, t: float = 1.0) -> CheckResult:
    ra, rb = _rngs(seed, 2)
    a = sample_stable_subordinator(0.5, t, ra, n)
    b = sample_fpt(t / math.sqrt(2), rb, n)
    return _ks_check("stable_half_is_passage", "S_1/2(t) equals T at level t/sqrt(2) in law",
                     ks_two_sample(a, b), t=t)


def check_stable_ratio_lamperti(seed: int, n: int = 100_000) -> CheckResult:
    ra, rb = _rngs(seed, 2)
    a = draw(ProcessSpec("StableRatio", nu=0.5), ra, n)
    b = draw(ProcessSpec("TRgamma", gamma=1.0, t=1.0), rb, n)
    return _ks_check("stable_ratio_lamperti", "ratio of independent S_1/2 equals T at level R^1(1)",
                     ks_two_sample(a, b))


def check_stable_ratio_law(seed: int, n: int = 100_000, nu: float = 0.5) -> CheckResult:
    return _law_ks("stable_ratio_law", "stable ratio follows the Lamperti density",
                   ProcessSpec("StableRatio", nu=nu), law("stable_ratio", nu=nu), seed, n)


def check_iterated_bessel_moment(seed: int, n: int = 1_000_000, m: float = 1.0,
                                 gamma: float = 2.0, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("IteratedBessel", gamma=gamma, t=t), n, seed)
    return _sigma_check("iterated_bessel_moment", "moments of the iterated Bessel process",
                        moment_estimate(b, m), mf.iterated_bessel_moment(m, gamma, t), m=m, gamma=gamma, t=t)


def check_bessel_at_passage_moment(seed: int, n: int = 1_000_000, mu: float = 0.5,
                                   gamma: float = 2.0, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("BesselAtFPT", gamma=gamma, t=t), n, seed)
    est = moment_estimate(b, mu)
    res = _sigma_check("bessel_at_passage_moment", "fractional moments of R(T_t)", est,
                       d.bessel_at_fpt_moment(mu, gamma, t), mu=mu, gamma=gamma, t=t)
    res.detail["finite_variance"] = est.finite_variance
    return res


def check_drifted_mean(seed: int, n: int = 1_000_000, beta: float = 1.0, mu: float = 2.0) -> CheckResult:
    b = sample(ProcessSpec("DriftedFPT", t=beta, mu=mu), n, seed)
    return _sigma_check("drifted_mean", "mean passage time with drift is beta/mu",
                        moment_estimate(b, 1.0), d.drifted_fpt_mean(beta, mu), beta=beta, mu=mu)


def check_drifted_laplace(seed: int, n: int = 1_000_000, beta: float = 1.0, mu: float = 1.0,
                          lam: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("DriftedFPT", t=beta, mu=mu), n, seed)
    return _sigma_check("drifted_laplace", "Laplace transform of the drifted passage time",
                        mean_estimate(np.exp(-lam * b.values)), d.drifted_fpt_laplace(beta, mu, lam),
                        beta=beta, mu=mu, lam=lam)


def check_iterated_passage_laplace(seed: int, n: int = 1_000_000, depth: int = 3, lam: float = 1.0,
                                   t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("IteratedFPT", depth=depth, t=t), n, seed)
    return _sigma_check("iterated_passage_laplace", "Laplace transform of the n-fold passage time",
                        mean_estimate(np.exp(-lam * b.values)), d.iterated_fpt_laplace(depth, lam, t),
                        depth=depth, lam=lam, t=t)


def check_iterated_passage_law(seed: int, n: int = 100_000, t: float = 1.0) -> CheckResult:
    return _law_ks("iterated_passage_law", "twice iterated passage time density",
                   ProcessSpec("IteratedFPT", depth=2, t=t), law("iterated_fpt", n=2, t=t), seed, n)


def check_stable_laplace(seed: int, n: int = 1_000_000, nu: float = 0.7, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("StableSubordinator", nu=nu, t=t), n, seed)
    return _sigma_check("stable_laplace", "E exp(-S_nu(t)) = exp(-t)",
                        mean_estimate(np.exp(-b.values)), math.exp(-t), nu=nu, t=t)


def check_sinh_ratio(seed: int, n: int = 1_000_000, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("BesselAtT", gamma=3.0, t=t), n, seed)
    return _sigma_check("sinh_ratio", "E sinh(R3(t))/R3(t) = exp(t/2)",
                        mean_estimate(np.sinh(b.values) / b.values), math.exp(t / 2), t=t)


_HYP = {"hyp2": "HypDistanceH2", "hyp3": "HypDistanceH3", "hypJ2": "HypH2AtFPT", "hypJ3": "HypH3AtFPT"}


def check_hyperbolic_law(seed: int, n: int = 100_000, which: str = "hyp3", t: float = 1.0,
                         convention: str = "half") -> CheckResult:
    spec = ProcessSpec(_HYP[which], t=t, convention=convention)
    return _law_ks(f"hyperbolic_law_{which}", f"hyperbolic distance sampler matches the {which} law",
                   spec, law(which, t=t, convention=convention), seed, n)


def check_hyperbolic_mean(seed: int, n: int = 1_000_000, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("HypDistanceH3", t=t), n, seed)
    ref = law("hyp3", t=t).moment(1.0)
    return _sigma_check("hyperbolic_mean", "mean hyperbolic distance in the half-space",
                        moment_estimate(b, 1.0), ref, t=t)


def check_p2_bessel_expectation(seed: int, n: int = 1_000_000, eta: float = 1.0, t: float = 1.0) -> CheckResult:
    """Monte Carlo of the planar Bessel expectation form of the half-plane density.

    The estimator has infinite variance (an inverse square-root singularity
    squared), so the result is reported without a pass/fail band.
    """
    b = sample(ProcessSpec("BesselAtT", gamma=2.0, t=t), n, seed)
    r = b.values
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(r > eta, math.sinh(eta) / np.sqrt(np.cosh(r) - math.cosh(eta)), 0.0)
    est = mean_estimate(g)
    c = math.exp(-t / 8) / math.sqrt(math.pi * t)
    ref = h.p2_density(eta, t)
    return CheckResult("p2_bessel_expectation", "half-plane density as a planar Bessel expectation",
                       True, c * est.estimate, ref, "reported only",
                       dict(std_error=c * est.std_error, n=n, eta=eta, t=t), informational=True)


def check_passage_scaling(seed: int, n: int = 100_000) -> CheckResult:
    ra, rb = _rngs(seed, 2)
    return _ks_check("passage_scaling", "T at level 2 equals 4 T at level 1 in law",
                     ks_two_sample(4 * sample_fpt(1.0, ra, n), sample_fpt(2.0, rb, n)))


def check_slow_down(seed: int, n: int = 1_000_000, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("FPT", t=t), n, seed)
    return _sigma_check("slow_down", "probability that T_t <= t",
                        mean_estimate(b.values <= t), float(d.levy_cdf(t, t)), t=t)


def check_half_normal_mean(seed: int, n: int = 1_000_000, t: float = 1.0) -> CheckResult:
    b = sample(ProcessSpec("BesselAtT", gamma=1.0, t=t), n, seed)
    return _sigma_check("half_normal_mean", "R^1(t) is half-normal", moment_estimate(b, 1.0),
                        math.sqrt(2 * t / math.pi), t=t)


def check_pushforward(seed: int, n: int = 100_000, which: str = "beta_arcsin",
                      gamma: float = 2.0, t: float = 1.0) -> CheckResult:
    """Transforms of R(T_t) against their closed laws."""
    b = sample(ProcessSpec("BesselAtFPT", gamma=gamma, t=t), n, seed).values
    mapped = {"beta_arcsin": lambda r: t ** 3 / (t * t + r * r),
              "inverse_bessel_at_fpt": lambda r: 1 / r,
              "hat_r": lambda r: 1 / (1 + r)}[which](b)
    return _ks_check(f"pushforward_{which}", f"transform of R(T_t) follows the {which} law",
                     ks_one_sample(mapped, law(which, gamma=gamma, t=t)), gamma=gamma, t=t)


def check_composite_law(seed: int, n: int = 100_000, which: str = "inverted_composition",
                        gamma: float = 2.0, t: float = 1.0, mu: float = 1.0, nu: float = 0.5) -> CheckResult:
    """Composite samplers against the density of the same law."""
    specs = {
        "inverted_composition": (ProcessSpec("TRgamma", gamma=gamma, t=t), dict(gamma=gamma, t=t)),
        "iterated_bessel": (ProcessSpec("IteratedBessel", gamma=gamma, t=t), dict(gamma=gamma, t=t)),
        "jr": (ProcessSpec("JRSquaredClock", gamma=gamma, t=t), dict(gamma=gamma, t=t)),
        "bessel_at_fpt": (ProcessSpec("BesselAtFPT", gamma=gamma, t=t), dict(gamma=gamma, t=t)),
        "drifted_composite": (ProcessSpec("BesselAtDriftedFPT", gamma=gamma, t=t, mu=mu),
                              dict(gamma=gamma, mu=mu, t=t)),
        "cauchy_at_stable": (ProcessSpec("CauchyAtStable", nu=nu, t=t), dict(nu=nu, t=t)),
    }
    spec, params = specs[which]
    return _law_ks(f"composite_{which}", f"composite sampler matches the {which} density",
                   spec, law(which, **params), seed, n)


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "folded_cauchy": check_folded_cauchy,
    "composition_swap": check_composition_swap,
    "passage_of_bessel_one": check_passage_of_bessel_one,
    "passage_of_bessel": check_passage_of_bessel,
    "stable_half_is_passage": check_stable_half_is_passage,
    "stable_ratio_lamperti": check_stable_ratio_lamperti,
    "stable_ratio_law": check_stable_ratio_law,
    "iterated_bessel_moment": check_iterated_bessel_moment,
    "bessel_at_passage_moment": check_bessel_at_passage_moment,
    "drifted_mean": check_drifted_mean,
    "drifted_laplace": check_drifted_laplace,
    "iterated_passage_laplace": check_iterated_passage_laplace,
    "iterated_passage_law": check_iterated_passage_law,
    "stable_laplace": check_stable_laplace,
    "sinh_ratio": check_sinh_ratio,
    "hyperbolic_law": check_hyperbolic_law,
    "hyperbolic_mean": check_hyperbolic_mean,
    "p2_bessel_expectation": check_p2_bessel_expectation,
    "passage_scaling": check_passage_scaling,
    "slow_down": check_slow_down,
    "half_normal_mean": check_half_normal_mean,
    "pushforward": check_pushforward,
    "composite_law": check_composite_law,
}


IDENTITIES = {
    "folded_cauchy": "R^1(T_1) is folded Cauchy",
    "composition_swap": "sqrt(T at level R(t^2)) equals R(T_t) in law",
    "passage_of_bessel_one": "T at level R^1(t) equals C(sqrt t)^2 in law",
    "passage_of_bessel": "T at level R(t) equals R(T_sqrt(t))^2 in law",
    "stable_half_is_passage": "S_1/2(t) equals T at level t/sqrt(2) in law",
    "stable_ratio_lamperti": "ratio of independent S_1/2 equals T at level R^1(1)",
    "stable_ratio_law": "stable ratio follows the Lamperti density",
    "iterated_bessel_moment": "moments of the iterated Bessel process",
    "bessel_at_passage_moment": "fractional moments of R(T_t)",
    "drifted_mean": "mean passage time with drift is beta/mu",
    "drifted_laplace": "Laplace transform of the drifted passage time",
    "iterated_passage_laplace": "Laplace transform of the n-fold passage time",
    "iterated_passage_law": "twice iterated passage time density",
    "stable_laplace": "E exp(-S_nu(t)) = exp(-t)",
    "sinh_ratio": "E sinh(R3(t))/R3(t) = exp(t/2)",
    "hyperbolic_law": "hyperbolic distance samplers match the closed laws",
    "hyperbolic_mean": "mean hyperbolic distance in the half-space",
    "p2_bessel_expectation": "half-plane density as a planar Bessel expectation",
    "passage_scaling": "T at level 2 equals 4 T at level 1 in law",
    "slow_down": "probability that T_t <= t",
    "half_normal_mean": "R^1(t) is half-normal",
    "pushforward": "transforms of R(T_t) follow their closed laws",
    "composite_law": "composite samplers match their densities",
}


def coverage_table() -> list[tuple[str, str]]:
    """(check name, identity it exercises), one row per identity."""
    return [(name, IDENTITIES[name]) for name in CHECKS]
