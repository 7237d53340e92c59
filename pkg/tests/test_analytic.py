import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from codedcomp.analytic import (
    WorkDistribution,
    baseline_completion_probability,
    collapse,
    completion_probability,
    gaussian_diagnostics,
    noncompletion_curve,
    sum_distribution_exact,
    sum_distribution_gaussian,
    work_pmf,
)

# Pr[Z_t < 40] from the polynomial-product oracle below, n=10, l=10, gamma=0.5 t, sigma=2
FROZEN_NONCOMPLETION = {7: 0.7207723970415497, 8: 0.4324099985688641, 10: 0.04427893446871245}


def oracle_pmf(l, gamma, sigma):
    v = np.arange(l + 1)
    dens = np.array([math.exp(-((x - gamma) ** 2) / (2 * sigma**2)) / math.sqrt(2 * math.pi * sigma**2) for x in v])
    return dens / dens.sum(), dens.sum()


def oracle_sum(pmfs):
    out = np.array([1.0])
    for p in pmfs:
        out = P.polymul(out, p)
    return out


def test_symmetric_two_point():
    np.testing.assert_allclose(work_pmf(1, 0.5, 0.7).pmf, [0.5, 0.5], atol=1e-15)


def test_fig4_worker_at_t2():
    d = work_pmf(10, 1.0, 2.0)
    assert d.pmf.sum() == pytest.approx(1, abs=1e-12)
    assert d.support_max == 10


def test_pmf_matches_direct_formula():
    d = work_pmf(5, 2.0, 1.0)
    want, c = oracle_pmf(5, 2.0, 1.0)
    np.testing.assert_allclose(d.pmf, want, rtol=1e-13)
    assert d.normalizer == pytest.approx(c, rel=1e-13)


def test_pmf_far_tail_is_stable():
    d = work_pmf(10, 400.0, 1.0)  # raw weights underflow without the shift
    assert d.pmf[-1] == pytest.approx(1.0) and np.isfinite(d.pmf).all()


def test_pmf_errors():
    with pytest.raises(ValueError):
        work_pmf(3, 1.0, 0.0)
    with pytest.raises(ValueError):
        work_pmf(-1, 1.0, 1.0)
    with pytest.raises(ValueError):
        WorkDistribution.from_pmf([0.5, 0.6])


def test_exact_sum_of_coins():
    coin = WorkDistribution.from_pmf([0.5, 0.5])
    np.testing.assert_allclose(sum_distribution_exact([coin, coin]).pmf, [0.25, 0.5, 0.25])


def test_exact_sum_single_is_identity():
    d = work_pmf(4, 1.5, 1.0)
    np.testing.assert_array_equal(sum_distribution_exact([d]).pmf, d.pmf)


def test_exact_sum_mean_is_linear():
    d = work_pmf(10, 1.0, 2.0)
    z = sum_distribution_exact([d] * 10)
    assert z.pmf.sum() == pytest.approx(1, abs=1e-10)
    assert np.arange(101) @ z.pmf == pytest.approx(10 * d.mean(), abs=1e-10)


def test_exact_sum_matches_polynomial_oracle():
    params = [(3, 1.0, 1.0), (5, 4.0, 2.0), (2, 0.0, 0.5), (7, 3.3, 1.7)]
    got = sum_distribution_exact([work_pmf(*p) for p in params]).pmf
    np.testing.assert_allclose(got, oracle_sum([oracle_pmf(*p)[0] for p in params]), atol=1e-15)


def test_gaussian_single_worker_parameters():
    d = work_pmf(6, 2.0, 1.5)
    z = sum_distribution_gaussian([d])
    assert z.gamma == pytest.approx(2.0 / d.normalizer)
    assert z.sigma == pytest.approx(1.5 / d.normalizer)
    x = np.arange(7)
    want = np.exp(-((x - z.gamma) ** 2) / (2 * z.sigma**2)) / math.sqrt(2 * math.pi * z.sigma**2)
    np.testing.assert_allclose(z.pmf, want)


def test_gaussian_diagnostic_reports_tv():
    rep = gaussian_diagnostics([work_pmf(10, 10.0, 2.0)] * 10)
    assert 0 < rep.tv_distance <= 1
    mid = gaussian_diagnostics([work_pmf(10, 4.0, 2.0)] * 10)
    assert 0 < mid.tv_distance < 0.05 and not mid.flagged


def test_gaussian_diagnostic_flags_wide_sigma():
    rep = gaussian_diagnostics([work_pmf(2, 1.0, 100.0)])
    assert rep.flagged and abs(rep.mass - 1) > 0.5


def test_gaussian_needs_parametric_inputs():
    with pytest.raises(ValueError):
        sum_distribution_gaussian([WorkDistribution.from_pmf([1.0])])


def test_completion_probability_bounds():
    z = sum_distribution_exact([work_pmf(3, 1.0, 1.0)] * 2)
    assert completion_probability(z, 0) == pytest.approx(1.0)
    assert completion_probability(z, 7) == 0.0
    with pytest.raises(ValueError):
        completion_probability(z, 8)


def test_fig4_curve_frozen_points():
    curve = {p.t: p.exact for p in noncompletion_curve([7, 8, 10])}
    for t, want in FROZEN_NONCOMPLETION.items():
        assert curve[t] == pytest.approx(want, rel=1e-9)
    # oracle recomputation of one point
    z = oracle_sum([oracle_pmf(10, 4.0, 2.0)[0]] * 10)
    assert z[:40].sum() == pytest.approx(FROZEN_NONCOMPLETION[8], rel=1e-9)


def test_fig4_crosses_half_near_8():
    curve = noncompletion_curve(np.arange(1, 41))
    values = np.array([p.exact for p in curve])
    first_below = int(np.argmax(values < 0.5)) + 1
    assert first_below == 8


def test_baseline_binary_workers_equal():
    dists = [WorkDistribution.from_pmf([0.3, 0.7]), WorkDistribution.from_pmf([0.6, 0.4])]
    for k in range(3):
        assert baseline_completion_probability(dists, k) == pytest.approx(
            completion_probability(sum_distribution_exact(dists), k))


def test_baseline_hand_example():
    d = WorkDistribution.from_pmf([0.2, 0.3, 0.5])
    assert baseline_completion_probability([d], 1) == pytest.approx(0.5)
    assert completion_probability(sum_distribution_exact([d]), 1) == pytest.approx(0.8)
    np.testing.assert_allclose(collapse(d).pmf, [0.5, 0.0, 0.5])
    with pytest.raises(ValueError):
        baseline_completion_probability([d], 3)


def test_fig4_dominance_and_monotone():
    curve = noncompletion_curve(np.arange(1, 41))
    exact = np.array([p.exact for p in curve])
    base = np.array([p.baseline for p in curve])
    assert np.all(np.diff(exact) <= 0)
    assert np.all(exact <= base)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 8), st.floats(-3, 12), st.floats(0.2, 5)), min_size=1, max_size=5),
       st.integers(0, 40))
def test_dominance_property(params, k):
    dists = [work_pmf(*p) for p in params]
    L = sum(p[0] for p in params)
    k = min(k, L)
    sub = completion_probability(sum_distribution_exact(dists), k)
    assert sub >= baseline_completion_probability(dists, k) - 1e-12


@settings(max_examples=40)
@given(st.integers(1, 10), st.floats(-2, 10), st.floats(0.1, 3), st.floats(0, 3), st.integers(0, 30))
def test_completion_nondecreasing_in_gamma(l, g, sigma, step, k):
    n = 3
    k = min(k, n * l)
    lo = completion_probability(sum_distribution_exact([work_pmf(l, g, sigma)] * n), k)
    hi = completion_probability(sum_distribution_exact([work_pmf(l, g + step, sigma)] * n), k)
    assert hi >= lo - 1e-12
