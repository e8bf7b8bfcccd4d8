"""Seeded exact samplers and the composition engine.

Every primitive draws fixed-time marginals from closed transformations of
normal, gamma, uniform and exponential variates.  Composite laws are built
by evaluating an outer process at a random time drawn from an inner one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, UnsupportedParameterError

ALGORITHM = "PCG64"
_SEED_LIMIT = 2 ** 64

KINDS = (
    "BesselAtT", "IteratedBessel", "JRSquaredClock", "FPT", "DriftedFPT", "IteratedFPT",
    "StableSubordinator", "Cauchy", "BesselAtFPT", "BesselAtDriftedFPT", "TRgamma",
    "StableRatio", "CauchyAtStable", "HypDistanceH2", "HypDistanceH3", "HypH2AtFPT", "HypH3AtFPT",
)
_ALIASES = {"InverseComposition": "TRgamma"}
_NEEDS_GAMMA = {"BesselAtT", "IteratedBessel", "JRSquaredClock", "BesselAtFPT", "BesselAtDriftedFPT", "TRgamma"}
_NEEDS_NU = {"StableSubordinator", "StableRatio", "CauchyAtStable"}
_REAL_LINE = {"Cauchy", "CauchyAtStable"}


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise DomainError("seed must be a 64-bit unsigned integer")
    return seed


class RngState:
    """A named generator fixed by seed; the same seed gives the same stream."""

    def __init__(self, seed: int, algorithm: str = ALGORITHM):
        if algorithm != ALGORITHM:
            raise UnsupportedParameterError(f"only {ALGORITHM} is available")
        self.seed = _check_seed(seed)
        self.algorithm = algorithm
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    @property
    def state(self) -> bytes:
        return json.dumps(self.generator.bit_generator.state, sort_keys=True).encode()

    def spawn(self, n: int) -> list[RngState]:
        return [RngState(s, self.algorithm) for s in spawn_seeds(self.seed, n)]


def spawn_seeds(master: int, n: int) -> list[int]:
    """Independent task seeds: child i of SeedSequence(master), folded to 64 bits."""
    children = np.random.SeedSequence(_check_seed(master)).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    t: float = 1.0
    gamma: float | None = None
    mu: float = 0.0
    nu: float | None = None
    depth: int = 1
    convention: str = "half"

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise DomainError(f"unknown process kind {self.kind!r}")
        if not self.t > 0:
            raise DomainError("t must be positive")
        if kind in _NEEDS_GAMMA and not (self.gamma is not None and self.gamma > 0):
            raise DomainError(f"{kind} needs gamma > 0")
        if kind in _NEEDS_NU and not (self.nu is not None and 0 < self.nu < 1):
            raise DomainError(f"{kind} needs 0 < nu < 1")
        if int(self.depth) != self.depth or self.depth < 1:
            raise DomainError("depth must be an integer >= 1")
        if kind in ("DriftedFPT", "BesselAtDriftedFPT") and self.mu < 0:
            raise UnsupportedParameterError("the drifted passage law is defective for mu < 0")
        if self.convention not in ("half", "whole"):
            raise DomainError("convention must be 'half' or 'whole'")

    @property
    def real_line(self) -> bool:
        return self.kind in _REAL_LINE


@dataclass
class SampleBatch:
    spec: ProcessSpec
    seed: int
    values: np.ndarray
    count: int = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.count = len(self.values)
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("sampler produced non-finite values")
        if not self.spec.real_line and np.any(self.values < 0):
            raise NumericalError("sampler produced values outside the support")


# ------------------------------------------------------------ primitives

def _gen(rng):
    return rng.generator if isinstance(rng, RngState) else rng


def _shape(t, size):
    return np.shape(t) if size is None else size


def sample_bessel_at(gamma: float, t, rng, size=None):
    """R(t) from 0: R^2/(2t) is Gamma(gamma/2, 1)."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    g = _gen(rng).standard_gamma(gamma / 2, size=_shape(t, size))
    return np.sqrt(2 * np.asarray(t, dtype=float) * g)


def sample_fpt(t, rng, size=None):
    """Passage time of Brownian motion through level t: t^2 / N^2."""
    n = _gen(rng).standard_normal(size=_shape(t, size))
    return np.asarray(t, dtype=float) ** 2 / n ** 2


def sample_drifted_fpt(beta, mu: float, rng, size=None):
    """Inverse Gaussian with mean beta/mu and shape beta^2; Levy law when mu = 0."""
    if mu < 0:
        raise UnsupportedParameterError("the drifted passage law is defective for mu < 0")
    if mu == 0:
        return sample_fpt(beta, rng, size)
    beta = np.asarray(beta, dtype=float)
    return _gen(rng).wald(beta / mu, beta ** 2, size=_shape(beta, size))


def sample_stable_subordinator(nu: float, t, rng, size=None):
    """Positive stable with E exp(-lam S) = exp(-t lam^nu), by Kanter's angular method."""
    if not 0 < nu < 1:
        raise DomainError("nu must lie in (0, 1)")
    g = _gen(rng)
    shape = _shape(t, size)
    u = math.pi * g.random(size=shape)
    e = g.standard_exponential(size=shape)
    # in logs: the power 1/(1-nu) overflows as nu -> 1
    log_a = ((np.log(np.sin(nu * u)) - np.log(np.sin(u))) / (1 - nu)
             + np.log(np.sin((1 - nu) * u)) - np.log(np.sin(nu * u)))
    log_s = np.log(np.asarray(t, dtype=float)) / nu + (1 - nu) / nu * (log_a - np.log(e))
    return np.exp(log_s)


def sample_cauchy(t, rng, size=None):
    """Symmetric Cauchy process at time t, i.e. scale t."""
    return np.asarray(t, dtype=float) * _gen(rng).standard_cauchy(size=_shape(t, size))


def _drift_norm(t, drift, g, shape):
    t = np.asarray(t, dtype=float)
    z = g.standard_normal(size=shape + (3,))
    w = np.sqrt(t)[..., None] * z
    w[..., 0] += drift * t
    return np.sqrt(np.sum(w * w, axis=-1))


def sample_hyperbolic_distance(dim: int, t, rng, size=None, convention: str = "half"):
    """Hyperbolic distance from the origin of Brownian motion on H^dim at time t.

    H^3: the norm of a 3-dimensional Brownian motion with unit drift.  H^2:
    the same norm with drift 1/2 mapped through eta = 2 asinh(sqrt(v) sinh(phi/2)),
    v = U(2 - U) with U uniform.
    """
    if convention not in ("half", "whole"):
        raise DomainError("convention must be 'half' or 'whole'")
    g = _gen(rng)
    tt = np.asarray(t, dtype=float) * (2.0 if convention == "whole" else 1.0)
    shape = np.shape(tt) if size is None else tuple(np.atleast_1d(size))
    tt = np.broadcast_to(tt, shape)
    if dim == 3:
        return _drift_norm(tt, 1.0, g, shape)
    if dim != 2:
        raise DomainError("dim must be 2 or 3")
    phi = _drift_norm(tt, 0.5, g, shape)
    u = g.random(size=shape)
    v = u * (2 - u)
    big = phi > 700
    with np.errstate(over="ignore"):
        eta = 2 * np.arcsinh(np.sqrt(v) * np.sinh(np.where(big, 0.0, phi / 2)))
    return np.where(big, np.log(v) + phi, eta)


# ------------------------------------------------------------ composition

def compose(outer: ProcessSpec, inner_draw, rng):
    """Draw the outer process at the random time (or level) ``inner_draw``."""
    inner = np.asarray(inner_draw, dtype=float)
    if np.any(inner < 0):
        raise DomainError("inner draw must be nonnegative")
    k = outer.kind
    if k == "BesselAtT":
        return sample_bessel_at(outer.gamma, inner, rng)
    if k == "FPT":
        return sample_fpt(inner, rng)
    if k == "DriftedFPT":
        return sample_drifted_fpt(inner, outer.mu, rng)
    if k == "StableSubordinator":
        return sample_stable_subordinator(outer.nu, inner, rng)
    if k == "Cauchy":
        return sample_cauchy(inner, rng)
    if k in ("HypDistanceH2", "HypDistanceH3"):
        return sample_hyperbolic_distance(2 if k.endswith("H2") else 3, inner, rng,
                                          convention=outer.convention)
    raise UnsupportedParameterError(f"{k} cannot be evaluated at a random time")


def draw(spec: ProcessSpec, rng, size: int):
    """``size`` independent draws of the law named by ``spec``."""
    k, t = spec.kind, spec.t
    bessel = lambda: sample_bessel_at(spec.gamma, t, rng, size)
    outer_bessel = ProcessSpec("BesselAtT", gamma=spec.gamma) if spec.kind in _NEEDS_GAMMA else None
    if k in ("BesselAtT", "FPT", "DriftedFPT", "StableSubordinator", "Cauchy",
             "HypDistanceH2", "HypDistanceH3"):
        return compose(spec, np.full(size, t), rng)
    if k == "IteratedBessel":
        return compose(outer_bessel, bessel(), rng)
    if k == "JRSquaredClock":
        return compose(outer_bessel, bessel() ** 2, rng)
    if k == "BesselAtFPT":
        return compose(outer_bessel, sample_fpt(t, rng, size), rng)
    if k == "BesselAtDriftedFPT":
        return compose(outer_bessel, sample_drifted_fpt(t, spec.mu, rng, size), rng)
    if k == "IteratedFPT":
        x = np.full(size, t)
        for _ in range(spec.depth):
            x = sample_fpt(x, rng)
        return x
    if k == "TRgamma":
        return compose(ProcessSpec("FPT"), bessel(), rng)
    if k == "StableRatio":
        s1 = sample_stable_subordinator(spec.nu, 1.0, rng, size)
        s2 = sample_stable_subordinator(spec.nu, 1.0, rng, size)
        return s1 / s2
    if k == "CauchyAtStable":
        return compose(ProcessSpec("Cauchy"), sample_stable_subordinator(spec.nu, t, rng, size), rng)
    if k in ("HypH2AtFPT", "HypH3AtFPT"):
        level = t * (math.sqrt(2) if spec.convention == "whole" else 1.0)
        outer = ProcessSpec("HypDistanceH2" if k == "HypH2AtFPT" else "HypDistanceH3")
        return compose(outer, sample_fpt(level, rng, size), rng)
    raise UnsupportedParameterError(k)


def sample(spec: ProcessSpec, count: int, seed: int) -> SampleBatch:
    """A reproducible batch: the same (spec, seed, count) gives identical values."""
    if count < 1:
        raise DomainError("count must be positive")
    rng = RngState(seed)
    return SampleBatch(spec, rng.seed, draw(spec, rng, int(count)))


def sample_from_law(law, count: int, rng, iterations: int = 80):
    """Inverse-CDF draws from any DensityFn by bisection on its CDF.

    Used for laws without a direct construction; accuracy is that of the
    law's CDF (tabulated laws interpolate to about 1e-9).
    """
    u = _gen(rng).random(count)
    lo, hi = law.support
    scale = law.scale
    if math.isinf(lo):
        a, b = np.full(count, -scale), np.full(count, scale)
        while np.any(law.cdf(a) > u):
            a = np.where(law.cdf(a) > u, 4 * a, a)
        while np.any(law.cdf(b) < u):
            b = np.where(law.cdf(b) < u, 4 * b, b)
    else:
        a = np.full(count, float(lo))
        if math.isinf(hi):
            b = np.full(count, lo + scale)
            for _ in range(400):
                short = law.cdf(b) < u
                if not np.any(short):
                    break
                b = np.where(short, lo + 4 * (b - lo), b)
            else:
                raise NumericalError("CDF does not reach the requested level")
        else:
            b = np.full(count, float(hi))
    for _ in range(iterations):
        m = 0.5 * (a + b)
        left = law.cdf(m) < u
        a, b = np.where(left, m, a), np.where(left, b, m)
        if np.all(b - a <= 1e-13 * np.abs(b) + 1e-300):
            break
    return 0.5 * (a + b)
