import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trendlab.core import (
    DomainError,
    ModelParams,
    NoiseSpec,
    RatioSample,
    TopicSeries,
    TrendSequence,
    TweetRecord,
    UndefinedRatioError,
    cumulate,
    interval_index,
    ratio,
)


@pytest.mark.parametrize(
    "counts, expected",
    [([2, 3, 5], [2, 5, 10]), ([7], [7]), ([0, 0, 4], [0, 0, 4])],
)
def test_cumulate_examples(counts, expected):
    assert cumulate(counts).tolist() == expected


def test_cumulate_rejects_empty_and_negative():
    with pytest.raises(DomainError):
        cumulate([])
    with pytest.raises(DomainError):
        cumulate([1, -1])


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=10**4))
def test_cumulate_matches_stored_cumulative(counts):
    series = TopicSeries.from_counts("q", counts, integral=True)
    out = cumulate(counts)
    assert np.array_equal(out, series.cumulative)
    assert np.all(np.diff(out) >= 0)
    assert out[-1] == sum(counts)


def test_series_rejects_inconsistent_cumulative():
    with pytest.raises(DomainError):
        TopicSeries("q", [1, 2], [1, 4])


def test_series_is_immutable():
    s = TopicSeries.from_counts("q", [1, 2, 3])
    with pytest.raises(ValueError):
        s.counts[0] = 5
    with pytest.raises(AttributeError):
        s.topic = "other"


def test_ratio_examples():
    s = TopicSeries.from_counts("q", [2, 3, 5])
    assert ratio(s, 2, 0) == 5.0
    with pytest.raises(DomainError):
        ratio(s, 1, 1)
    zero = TopicSeries.from_counts("z", [0, 3, 3])
    with pytest.raises(UndefinedRatioError):
        ratio(zero, 2, 0)


@given(st.lists(st.integers(1, 1000), min_size=3, max_size=200), st.data())
def test_ratio_chain_property(counts, data):
    s = TopicSeries.from_counts("q", counts)
    a, b, c = sorted(data.draw(st.lists(st.integers(0, len(counts) - 1), min_size=3, max_size=3, unique=True)))
    chained = ratio(s, c, b) * ratio(s, b, a)
    assert chained == pytest.approx(ratio(s, c, a), rel=1e-12)


def test_interval_edges():
    assert interval_index(0) == 0
    assert interval_index(1199) == 0
    assert interval_index(1200) == 1
    with pytest.raises(DomainError):
        interval_index(5, origin=10)


def test_tweet_record_invariants():
    TweetRecord("q", "a", 0)
    TweetRecord("q", "a", 10, True, "b")
    with pytest.raises(DomainError):
        TweetRecord("q", "a", 0, True)
    with pytest.raises(DomainError):
        TweetRecord("q", "a", 0, False, "b")
    with pytest.raises(DomainError):
        TweetRecord("q", "a", 0, True, "a")
    with pytest.raises(DomainError):
        TweetRecord("", "a", 0)
    with pytest.raises(DomainError):
        TweetRecord("q", "a", -1)


def test_noise_spec_and_params_validation():
    with pytest.raises(DomainError):
        NoiseSpec("lognormal", -1)
    with pytest.raises(DomainError):
        NoiseSpec("degenerate", 0.1)
    with pytest.raises(DomainError):
        NoiseSpec("gamma", 0.0)
    with pytest.raises(DomainError):
        ModelParams(theta=2.5, gamma_scale=1.0)
    with pytest.raises(DomainError):
        ModelParams(noise_kind="degenerate", sigma2=0.25)
    p = ModelParams(noise_kind="degenerate", sigma2=0.0, gamma_scale=2.0, constant_gamma_after=4)
    assert p.gamma(2) == 1.0
    assert p.gamma(10) == 0.5


def test_lognormal_parameters():
    spec = NoiseSpec("lognormal", 0.25)
    assert spec.log_scale**2 == pytest.approx(np.log(1.25))
    assert spec.log_location == pytest.approx(-np.log(1.25) / 2)


def test_ratio_sample_invariants():
    RatioSample(3, 1, [1.0, 2.5])
    with pytest.raises(DomainError):
        RatioSample(1, 1, [1.0])
    with pytest.raises(DomainError):
        RatioSample(3, 1, [0.5])


def test_trend_sequence_stop():
    seq = TrendSequence("q", 4, 3)
    assert seq.stop == 7
    with pytest.raises(DomainError):
        TrendSequence("q", -1, 1)
