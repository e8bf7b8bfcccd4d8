import math

import numpy as np
import pytest
from scipy import stats

from bessel_subordinate import densities as d
from bessel_subordinate import mc_harness as mc
from bessel_subordinate import samplers as s
from bessel_subordinate.errors import DataError, DomainError
from bessel_subordinate.registry import law
from bessel_subordinate.samplers import ProcessSpec, RngState

SEED = 20261016


def test_folded_cauchy():
    res = mc.check_folded_cauchy(SEED)
    assert res.passed and res.detail["p_value"] > 0.01


def test_statistic_shrinks_like_inverse_sqrt_n():
    cdf = lambda x: stats.norm.cdf(x)
    mean_d = []
    for n in (1000, 100_000):
        mean_d.append(np.mean([mc.ks_one_sample(RngState(i).generator.standard_normal(n), cdf).statistic
                               for i in range(20)]))
    slope = math.log(mean_d[1] / mean_d[0]) / math.log(100)
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_power_against_wrong_gamma():
    b = s.sample(ProcessSpec("BesselAtFPT", gamma=2.0, t=1.0), 100_000, SEED)
    assert mc.ks_one_sample(b, law("bessel_at_fpt", gamma=3.0, t=1.0)).p_value < 1e-6


def test_pvalue_agrees_with_scipy():
    x = RngState(3).generator.standard_normal(20000)
    ours = mc.ks_one_sample(x, stats.norm.cdf)
    ref = stats.kstest(x, "norm")
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-12)
    assert ours.p_value == pytest.approx(ref.pvalue, abs=5e-3)
    y = RngState(4).generator.standard_normal(15000)
    two = mc.ks_two_sample(x, y)
    ref2 = stats.ks_2samp(x, y)
    assert two.statistic == pytest.approx(ref2.statistic, abs=1e-12)
    assert two.p_value == pytest.approx(ref2.pvalue, abs=5e-3)


def test_two_sample_identities():
    assert mc.check_composition_swap(SEED).passed
    assert mc.check_passage_of_bessel_one(SEED).passed
    assert mc.check_passage_of_bessel(SEED, gamma=3.0, t=0.5).passed


def test_identical_batches_have_zero_statistic():
    a = s.sample(ProcessSpec("FPT"), 1000, 9)
    res = mc.ks_two_sample(a, s.sample(ProcessSpec("FPT"), 1000, 9))
    assert res.statistic == 0.0 and res.p_value == 1.0
    assert res.reference == "two-sample"


def test_data_errors():
    with pytest.raises(DataError):
        mc.ks_one_sample(np.array([0.1] * 50 + [np.nan] * 60), stats.norm.cdf)
    with pytest.raises(DataError):
        mc.ks_one_sample(np.ones(10), stats.norm.cdf)
    with pytest.raises(DataError):
        mc.ks_two_sample(np.ones(200), np.full(200, np.nan))


def test_statistic_in_unit_interval():
    res = mc.ks_one_sample(np.full(500, 10.0), stats.norm.cdf)
    assert 0 <= res.statistic <= 1 and 0 <= res.p_value <= 1


def test_empirical_cdf():
    v = np.arange(1.0, 201.0)
    np.testing.assert_allclose(mc.empirical_cdf(v, [0.5, 100, 250]), [0, 0.5, 1])


# ------------------------------------------------------------ moments

def test_iterated_bessel_first_moment():
    res = mc.check_iterated_bessel_moment(SEED, m=1, gamma=2.0)
    assert res.passed


def test_half_moment_of_bessel_at_passage():
    res = mc.check_bessel_at_passage_moment(SEED)
    assert res.passed
    assert res.reference == pytest.approx(d.bessel_at_fpt_moment(0.5, 2.0, 1.0))
    # E R is infinite here, so the standard error is flagged as indicative only
    assert res.detail["finite_variance"] is False


def test_moment_refusal_on_cauchy_tail():
    b = s.sample(ProcessSpec("BesselAtFPT", gamma=1.0, t=1.0), 1000, SEED)
    with pytest.raises(DomainError):
        mc.moment_estimate(b, 1.0)
    assert mc.moment_estimate(b, 0.25).finite_variance


def test_moment_strip_agrees_with_registry():
    cases = [
        (ProcessSpec("BesselAtFPT", gamma=2.5), law("bessel_at_fpt", gamma=2.5, t=1.0)),
        (ProcessSpec("TRgamma", gamma=3.0), law("inverted_composition", gamma=3.0, t=1.0)),
        (ProcessSpec("StableRatio", nu=0.3), law("stable_ratio", nu=0.3)),
        (ProcessSpec("FPT"), law("fpt", t=1.0)),
        (ProcessSpec("HypDistanceH3"), law("hyp3", t=1.0)),
        (ProcessSpec("BesselAtT", gamma=0.7), law("bessel_transition", gamma=0.7, t=1.0)),
    ]
    for spec, f in cases:
        assert mc.moment_strip(spec) == tuple(f.convergence_strip)


def test_moment_std_error_positive():
    with pytest.raises(DataError):
        mc.moment_estimate(s.SampleBatch(ProcessSpec("FPT"), 1, np.ones(200)), 1.0, strip=(-1, 10))


# ------------------------------------------------------------ coverage

def test_coverage_table_has_one_row_per_check():
    rows = mc.coverage_table()
    assert [r[0] for r in rows] == list(mc.CHECKS)
    assert all(r[1] for r in rows)
    assert len({r[0] for r in rows}) == len(rows)


def test_informational_check_is_labelled():
    res = mc.check_p2_bessel_expectation(SEED, n=200_000)
    assert res.informational
    # heavy tailed, but the estimate is still in the right neighbourhood
    assert res.value == pytest.approx(res.reference, rel=0.05)
