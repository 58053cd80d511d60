import numpy as np
import pytest

from trendlab.core import ModelParams, NoiseSpec, ResourceLimitError, TopicSeries
from trendlab.estimators import moment_normality
from trendlab.sim import (
    apply_stop_rule,
    sample_noise,
    simulate_cohort,
    simulate_topic,
    topic_stream,
)

from oracles import log_ratio_cumulants, recursion_loop


def test_degenerate_noise_is_one():
    spec = NoiseSpec("degenerate", 0.0)
    stream = topic_stream(1, 0)
    assert sample_noise(spec, stream) == 1.0
    assert np.all(sample_noise(spec, stream, 100) == 1.0)


@pytest.mark.parametrize("kind", ["lognormal", "gamma"])
def test_noise_moments(kind):
    draws = sample_noise(NoiseSpec(kind, 0.25), topic_stream(7, 0), 1_000_000)
    assert np.all(draws > 0)
    assert 0.99 <= draws.mean() <= 1.01
    assert 0.245 <= draws.var() <= 0.255


def test_degenerate_closed_form_small():
    p = ModelParams(n_topics=1, n_intervals=4, n0=3, sigma2=0.0, noise_kind="degenerate")
    s = simulate_topic(p, 0)
    np.testing.assert_allclose(s.cumulative, [3, 6, 9, 12, 15], rtol=1e-12)


def test_degenerate_closed_form_long():
    p = ModelParams(n_topics=1, n_intervals=1000, n0=2.5, sigma2=0.0, noise_kind="degenerate")
    s = simulate_topic(p, 0)
    t = np.arange(1001)
    np.testing.assert_allclose(s.cumulative, 2.5 * (t + 1), rtol=1e-9, atol=0)


def test_zero_gamma_is_flat():
    p = ModelParams(n_topics=1, n_intervals=20, n0=4, gamma_scale=0.0, theta=0.5)
    s = simulate_topic(p, 0)
    assert np.all(s.cumulative == 4)


def test_recursion_matches_plain_loop():
    p = ModelParams(n_topics=3, n_intervals=50, n0=2.0, sigma2=0.25, seed=99)
    noise = sample_noise(p.noise, topic_stream(99, 2), 50)
    expected = recursion_loop(2.0, [1.0 / t for t in range(1, 51)], noise)
    np.testing.assert_allclose(simulate_topic(p, 2).cumulative, expected, rtol=1e-12)


@pytest.mark.slow
def test_mean_growth_is_linear():
    # E N(t) / n0 = prod(1 + 1/s) = t + 1 = 49 at t = 48
    p = ModelParams(n_topics=5000, n_intervals=48, n0=1.0, sigma2=0.25, seed=3)
    series, _ = simulate_cohort(p)
    final = np.array([s.cumulative[48] for s in series])
    assert 44 <= final.mean() <= 54


def test_counts_non_negative():
    p = ModelParams(n_topics=50, n_intervals=96, sigma2=1.0, noise_kind="gamma", seed=4)
    for s in simulate_cohort(p)[0]:
        assert np.all(s.counts >= 0)


def test_topic_alone_equals_cohort_member():
    p = ModelParams(n_topics=20, n_intervals=30, seed=11)
    series, _ = simulate_cohort(p)
    assert simulate_topic(p, 13) == series[13]


def test_cohort_determinism_and_seed_sensitivity():
    p = ModelParams(n_topics=5, n_intervals=30, seed=1)
    a, sa = simulate_cohort(p)
    b, sb = simulate_cohort(p)
    assert all(x == y for x, y in zip(a, b)) and sa == sb
    c, _ = simulate_cohort(ModelParams(n_topics=5, n_intervals=30, seed=2))
    assert any(x != y for x, y in zip(a, c))


def test_degenerate_cohort_identical_linear():
    p = ModelParams(n_topics=3, n_intervals=10, n0=2, sigma2=0.0, noise_kind="degenerate")
    series, _ = simulate_cohort(p)
    for s in series:
        np.testing.assert_allclose(s.cumulative, 2 * np.arange(1, 12))
        assert s.cumulative.tolist() == series[0].cumulative.tolist()


def test_resource_guard():
    with pytest.raises(ResourceLimitError):
        simulate_cohort(ModelParams(n_topics=10**6, n_intervals=10**3))


def test_stop_rule_examples():
    s = TopicSeries.from_cumulative("q", [1, 2, 3, 4])
    run = apply_stop_rule(s, 1.4, burn_in=0)
    assert (run.start, run.length, run.censored) == (1, 2, False)
    never = apply_stop_rule(s, 0.0, burn_in=0)
    assert never.length == 3 and never.censored
    now = apply_stop_rule(s, 10.0, burn_in=0)
    assert now.length == 0 and not now.censored


def test_stop_rule_recovers_noise_with_gamma():
    # phi_t - 1 = gamma xi_t, so the normalized statistic is xi itself
    s = TopicSeries.from_cumulative("q", [1.0, 1.5, 1.5 * 1.05, 1.5 * 1.05 * 1.2])
    run = apply_stop_rule(s, 0.4, burn_in=0, gamma=0.5)
    # xi = 1.0, 0.1, 0.4 -> fails at t=2
    assert run.length == 1


def test_stop_rule_burn_in_range():
    s = TopicSeries.from_cumulative("q", [1, 2, 3])
    with pytest.raises(Exception):
        apply_stop_rule(s, 1.0, burn_in=3)


@pytest.mark.slow
def test_log_growth_moments_match_quadrature(reference_cohort):
    # at sigma2 = 0.25 ln N(96)/N(0) is visibly skewed; compare with the exact value
    values = np.array([np.log(s.cumulative[96] / s.cumulative[0]) for s in reference_cohort])
    m = moment_normality(values)
    skew, kurt = log_ratio_cumulants(0.25, 96, 0)
    assert m["skewness"] == pytest.approx(skew, abs=0.1)
    assert m["excess_kurtosis"] == pytest.approx(kurt, abs=0.25)


@pytest.mark.slow
def test_log_growth_is_normal_for_small_noise():
    p = ModelParams(n_topics=5000, n_intervals=96, sigma2=0.005, seed=8)
    series, _ = simulate_cohort(p)
    values = np.array([np.log(s.cumulative[96] / s.cumulative[0]) for s in series])
    m = moment_normality(values)
    assert abs(m["skewness"]) < 0.15
    assert abs(m["excess_kurtosis"]) < 0.3
