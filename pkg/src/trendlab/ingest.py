"""Reading and writing tweet streams, trend appearances, series and durations.

File formats
------------
stream (JSON lines, UTF-8)
    one object per line with ``topic``, ``author``, ``time`` (integer
    seconds), ``is_retweet`` and optionally ``retweeted_author``,
    ``followers`` and ``tweet_rate``. Unknown fields are ignored.
appearances (CSV)
    header ``topic,interval``.
series (CSV)
    header ``topic,interval,count,cumulative``.
durations (CSV)
    header ``topic,start,length,censored``.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    INTERVAL_SECONDS,
    CorruptInputError,
    DomainError,
    TopicSeries,
    TrendSequence,
    TweetRecord,
)
from .sim import EMISSION_STREAM, topic_stream

log = logging.getLogger(__name__)

MAX_REJECTED_FRACTION = 0.10
SERIES_HEADER = ["topic", "interval", "count", "cumulative"]
APPEARANCES_HEADER = ["topic", "interval"]
DURATIONS_HEADER = ["topic", "start", "length", "censored"]


@dataclass
class StreamFileSummary:
    records_read: int = 0
    records_rejected: int = 0
    topics: int = 0
    time_span: int = 0
    first_timestamp: Optional[int] = None
    rejected_lines: list = field(default_factory=list)

    def __post_init__(self):
        if not self.records_read >= self.records_rejected >= 0:
            raise DomainError("records_read >= records_rejected >= 0 violated")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def record_from_json(obj) -> TweetRecord:
    """Validate one decoded stream object and build its record."""
    if not isinstance(obj, dict):
        raise DomainError("record is not an object")
    topic, author, time = obj.get("topic"), obj.get("author"), obj.get("time")
    is_rt = obj.get("is_retweet")
    if not isinstance(topic, str) or not isinstance(author, str):
        raise DomainError("topic and author must be strings")
    if not _is_int(time):
        raise DomainError("time must be an integer")
    if not isinstance(is_rt, bool):
        raise DomainError("is_retweet must be a boolean")
    source = obj.get("retweeted_author")
    if source is not None and not isinstance(source, str):
        raise DomainError("retweeted_author must be a string")
    followers = obj.get("followers")
    if followers is not None and not _is_int(followers):
        raise DomainError("followers must be an integer")
    rate = obj.get("tweet_rate")
    if rate is not None and (isinstance(rate, bool) or not isinstance(rate, (int, float))):
        raise DomainError("tweet_rate must be a number")
    return TweetRecord(topic, author, time, is_rt, source, followers, rate)


def record_to_json(rec: TweetRecord) -> str:
    obj = {"topic": rec.topic, "author": rec.author, "time": int(rec.time), "is_retweet": rec.is_retweet}
    if rec.retweeted_author is not None:
        obj["retweeted_author"] = rec.retweeted_author
    if rec.followers is not None:
        obj["followers"] = rec.followers
    if rec.tweet_rate is not None:
        obj["tweet_rate"] = rec.tweet_rate
    return json.dumps(obj, separators=(",", ":"))


def parse_stream(path) -> tuple[list[TweetRecord], StreamFileSummary]:
    """Read a JSON-lines tweet stream.

    Malformed lines are skipped and their line numbers kept in the summary;
    more than 10% malformed lines makes the whole file corrupt.
    """
    path = Path(path)
    records = []
    rejected = []
    read = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            read += 1
            try:
                records.append(record_from_json(json.loads(line)))
            except (json.JSONDecodeError, DomainError) as exc:
                rejected.append(lineno)
                log.debug("%s:%d rejected: %s", path, lineno, exc)
    if read and len(rejected) / read > MAX_REJECTED_FRACTION:
        raise CorruptInputError(f"{path}: {len(rejected)} of {read} lines are malformed")
    if rejected:
        log.warning("%s: rejected %d lines (first at line %d)", path, len(rejected), rejected[0])
    times = [r.time for r in records]
    summary = StreamFileSummary(
        records_read=read,
        records_rejected=len(rejected),
        topics=len({r.topic for r in records}),
        time_span=(max(times) - min(times)) if times else 0,
        first_timestamp=min(times) if times else None,
        rejected_lines=rejected,
    )
    return records, summary


def write_stream(path, records: Iterable[TweetRecord]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(record_to_json(rec))
            fh.write("\n")


def bin_intervals(
    records: Sequence[TweetRecord],
    origin: Optional[int] = None,
    length: Optional[int] = None,
) -> tuple[dict[str, TopicSeries], int]:
    """Count tweets per topic in 20-minute intervals.

    ``origin`` defaults to the earliest timestamp. Each series runs to the
    topic's last occupied interval unless ``length`` fixes a common horizon.
    Returns the series by topic and the number of records rejected for
    preceding the origin.
    """
    if origin is None:
        origin = min((r.time for r in records), default=0)
    per_topic = defaultdict(list)
    rejected = 0
    for rec in records:
        if rec.time < origin:
            rejected += 1
            continue
        per_topic[rec.topic].append((rec.time - origin) // INTERVAL_SECONDS)
    out = {}
    for topic in sorted(per_topic):
        idx = np.asarray(per_topic[topic], dtype=np.int64)
        size = int(idx.max()) + 1 if length is None else length
        if idx.max() >= size:
            raise DomainError(f"topic {topic!r} has tweets beyond interval {size - 1}")
        counts = np.bincount(idx, minlength=size)
        out[topic] = TopicSeries.from_counts(topic, counts, integral=True)
    if rejected:
        log.warning("rejected %d records before origin %d", rejected, origin)
    return out, rejected


def load_trend_appearances(path) -> dict[str, list[int]]:
    """Map topic to its sorted, de-duplicated trending intervals."""
    seen = defaultdict(set)
    bad = 0
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                topic = row["topic"]
                interval = int(row["interval"])
            except (KeyError, TypeError, ValueError):
                bad += 1
                continue
            if not topic or interval < 0:
                bad += 1
                continue
            seen[topic].add(interval)
    if bad:
        log.warning("%s: rejected %d appearance rows", path, bad)
    return {topic: sorted(v) for topic, v in sorted(seen.items())}


def write_trend_appearances(path, appearances: dict) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(APPEARANCES_HEADER)
        for topic, intervals in appearances.items():
            for t in intervals:
                w.writerow([topic, int(t)])


def fmt(x: float) -> str:
    """Compact text for a real value, lossless to ~1e-15 relative."""
    return format(float(x), ".15g")


def write_series(path, cohort: Iterable[TopicSeries]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for s in cohort:
            for t, (n, cum) in enumerate(zip(s.counts, s.cumulative)):
                w.writerow([s.topic, t, fmt(n), fmt(cum)])


def read_series(path) -> list[TopicSeries]:
    """Series in order of first appearance; intervals must be 0..L-1 without gaps."""
    rows = defaultdict(list)
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows[row["topic"]].append((int(row["interval"]), float(row["count"]), float(row["cumulative"])))
    out = []
    for topic, items in rows.items():
        items.sort()
        if [i for i, _, _ in items] != list(range(len(items))):
            raise CorruptInputError(f"series for {topic!r} has missing or duplicate intervals")
        counts = [c for _, c, _ in items]
        cumulative = [c for _, _, c in items]
        integral = all(float(c).is_integer() for c in counts)
        out.append(TopicSeries(topic, counts, cumulative, integral))
    return out


def write_durations(path, sequences: Iterable[TrendSequence]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DURATIONS_HEADER)
        for seq in sequences:
            w.writerow([seq.topic, seq.start, seq.length, int(seq.censored)])


def read_durations(path) -> list[TrendSequence]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return [
            TrendSequence(r["topic"], int(r["start"]), int(r["length"]), censored=r["censored"] in ("1", "true", "True"))
            for r in csv.DictReader(fh)
        ]


# --- simulated cohorts as tweet streams --------------------------------------


def stochastic_round(values: np.ndarray, stream: np.random.Generator) -> np.ndarray:
    """Round each value up with probability equal to its fractional part."""
    base = np.floor(values)
    return (base + (stream.random(values.shape) < values - base)).astype(np.int64)


def emit_topic(
    series: TopicSeries,
    seed: int,
    topic_id: int,
    n_authors: int = 1000,
    retweet_prob: float = 0.31,
) -> list[TweetRecord]:
    """Turn a real-valued simulated series into individual tweets.

    Counts are stochastically rounded, so each interval is off by less than
    one tweet. Authors come uniformly from a shared pool; a tweet becomes a
    retweet with probability ``retweet_prob`` and credits one of the topic's
    earlier original posters. The first tweet of a topic sits exactly at the
    start of interval 0, so the stream's earliest timestamp is 0.
    """
    stream = topic_stream(seed, topic_id, EMISSION_STREAM)
    counts = stochastic_round(np.asarray(series.counts, dtype=float), stream)
    posters: list[str] = []
    known = set()
    out = []
    for t, k in enumerate(counts):
        if k == 0:
            continue
        offsets = np.sort(stream.integers(0, INTERVAL_SECONDS, size=k))
        if not out:
            offsets[0] = 0
        authors = stream.integers(0, n_authors, size=k)
        coins = stream.random(k)
        picks = stream.random(k)
        for off, a, coin, pick in zip(offsets, authors, coins, picks):
            author = f"user{int(a)}"
            time = t * INTERVAL_SECONDS + int(off)
            src = None
            if coin < retweet_prob and posters and posters != [author]:
                i = int(pick * len(posters))
                if posters[i] == author:
                    i = (i + 1) % len(posters)
                src = posters[i]
            out.append(TweetRecord(series.topic, author, time, src is not None, src))
            if src is None and author not in known:
                known.add(author)
                posters.append(author)
    return out


def emit_cohort(cohort: Sequence[TopicSeries], seed: int, **kwargs) -> list[TweetRecord]:
    records = []
    for q, s in enumerate(cohort):
        records.extend(emit_topic(s, seed, q, **kwargs))
    records.sort(key=lambda r: (r.time, r.topic))
    return records
