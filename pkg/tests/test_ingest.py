import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trendlab.core import CorruptInputError, ModelParams, TweetRecord
from trendlab.ingest import (
    bin_intervals,
    emit_cohort,
    emit_topic,
    load_trend_appearances,
    parse_stream,
    read_durations,
    read_series,
    write_durations,
    write_series,
    write_stream,
    write_trend_appearances,
)
from trendlab.sim import simulate_cohort


def lines(path, objs):
    path.write_text("".join((o if isinstance(o, str) else json.dumps(o)) + "\n" for o in objs), encoding="utf-8")
    return path


def rec(topic="q", author="a", time=0, **kw):
    return {"topic": topic, "author": author, "time": time, "is_retweet": False, **kw}


def test_parse_well_formed(tmp_path):
    path = lines(tmp_path / "s.jsonl", [rec(time=5), rec(author="b", time=9, extra="ignored"),
                                         rec(author="c", time=1, is_retweet=True, retweeted_author="a", followers=3)])
    records, summary = parse_stream(path)
    assert len(records) == 3
    assert summary.records_read == 3 and summary.records_rejected == 0
    assert summary.first_timestamp == 1 and summary.time_span == 8 and summary.topics == 1
    assert records[2].followers == 3


def test_parse_rejects_retweet_without_source(tmp_path):
    good = [rec(author=f"u{i}", time=i) for i in range(20)]
    path = lines(tmp_path / "s.jsonl", good + [rec(is_retweet=True)])
    records, summary = parse_stream(path)
    assert len(records) == 20
    assert summary.records_rejected == 1
    assert summary.rejected_lines == [21]


def test_parse_empty_file(tmp_path):
    path = tmp_path / "e.jsonl"
    path.write_text("")
    records, summary = parse_stream(path)
    assert records == [] and summary.records_read == 0


def test_parse_corrupt_and_missing(tmp_path):
    path = lines(tmp_path / "c.jsonl", [rec(), "{not json", '{"topic": 1}'])
    with pytest.raises(CorruptInputError):
        parse_stream(path)
    with pytest.raises(OSError):
        parse_stream(tmp_path / "absent.jsonl")


def test_bin_edges():
    records = [TweetRecord("q", "a", t) for t in (0, 1199, 1200)]
    series, rejected = bin_intervals(records, origin=0)
    assert series["q"].counts.tolist() == [2, 1]
    assert rejected == 0


def test_bin_gap_fill():
    records = [TweetRecord("q", "a", t) for t in (0, 2500, 2600)]
    series, _ = bin_intervals(records)
    assert series["q"].counts.tolist() == [1, 0, 2]
    assert series["q"].cumulative.tolist() == [1, 1, 3]


def test_bin_rejects_before_origin():
    records = [TweetRecord("q", "a", t) for t in (10, 5000)]
    series, rejected = bin_intervals(records, origin=100)
    assert rejected == 1
    assert series["q"].total == 1


@given(st.lists(st.tuples(st.sampled_from("xyz"), st.integers(0, 10**6)), min_size=1, max_size=300))
def test_bin_conserves_mass(items):
    records = [TweetRecord(t, "a", s) for t, s in items]
    series, rejected = bin_intervals(records)
    assert rejected == 0
    assert sum(s.total for s in series.values()) == len(records)


def test_appearances(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("topic,interval\nA,0\nA,1\nA,0\nB,4\nB,-1\n")
    apps = load_trend_appearances(path)
    assert apps == {"A": [0, 1], "B": [4]}
    empty = tmp_path / "e.csv"
    empty.write_text("")
    assert load_trend_appearances(empty) == {}
    write_trend_appearances(tmp_path / "w.csv", apps)
    assert load_trend_appearances(tmp_path / "w.csv") == apps


def test_series_file_round_trip(tmp_path):
    series, runs = simulate_cohort(ModelParams(n_topics=6, n_intervals=40, seed=3, n0=7.5))
    write_series(tmp_path / "series.csv", series)
    back = read_series(tmp_path / "series.csv")
    assert [s.topic for s in back] == [s.topic for s in series]
    for a, b in zip(series, back):
        np.testing.assert_allclose(b.counts, a.counts, rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(b.cumulative, a.cumulative, rtol=1e-12, atol=1e-9)
    write_durations(tmp_path / "d.csv", runs)
    assert read_durations(tmp_path / "d.csv") == runs


def test_stream_round_trip(tmp_path):
    params = ModelParams(n_topics=8, n_intervals=30, n0=20.0, seed=5)
    series, _ = simulate_cohort(params)
    emitted = emit_cohort(series, params.seed)
    write_stream(tmp_path / "s.jsonl", emitted)
    records, summary = parse_stream(tmp_path / "s.jsonl")
    assert records == emitted and summary.records_rejected == 0
    binned, _ = bin_intervals(records, length=params.n_intervals + 1)
    for s in series:
        got = binned[s.topic]
        assert np.all(np.abs(got.counts - s.counts) < 1)
        assert got.total == sum(1 for r in emitted if r.topic == s.topic)


def test_emission_is_deterministic_and_valid():
    series, _ = simulate_cohort(ModelParams(n_topics=2, n_intervals=12, n0=10.0, seed=9))
    a = emit_topic(series[1], 9, 1, n_authors=5, retweet_prob=0.5)
    b = emit_topic(series[1], 9, 1, n_authors=5, retweet_prob=0.5)
    assert a == b
    assert a[0].time == 0
    assert any(r.is_retweet for r in a)
    assert all(r.retweeted_author != r.author for r in a if r.is_retweet)
