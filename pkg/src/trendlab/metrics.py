"""Event-stream metrics: trend sequences, author activity and retweet propagation."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    DomainError,
    TrendSequence,
    TweetRecord,
    UndefinedCorrelationError,
    UndefinedDominationError,
    interval_index,
)
from .estimators import pearson

FOUR_HOURS = 12  # intervals


@dataclass(frozen=True)
class AuthorStats:
    author: str
    tweet_count: int = 0
    topics_initiated: int = 0
    topics_retweeted_in: int = 0
    retweets_received: int = 0
    followers: Optional[int] = None
    tweet_rate: Optional[float] = None

    def __post_init__(self):
        if self.retweets_received == 0 and self.topics_retweeted_in != 0:
            raise DomainError("an author with no retweets cannot be retweeted in any topic")

    @property
    def retweet_ratio(self) -> float:
        return retweet_ratio(self.retweets_received, self.topics_retweeted_in)


@dataclass(frozen=True)
class TopicMetrics:
    topic: str
    total_tweets: int
    unique_authors: int
    active_ratio: float
    retweet_count: int
    domination_ratio: Optional[float]
    trend_duration: int
    sequence_count: int

    def __post_init__(self):
        if self.total_tweets < 1 or self.unique_authors < 1:
            raise DomainError("a topic needs at least one tweet and one author")
        if self.active_ratio < 1 or self.retweet_count > self.total_tweets:
            raise DomainError("inconsistent topic metrics")
        if self.domination_ratio is not None and not 0 < self.domination_ratio <= 1:
            raise DomainError("domination_ratio must lie in (0, 1]")


def split_sequences(trend_appearances: Mapping[str, Sequence[int]]) -> list[TrendSequence]:
    """Break each topic's trending intervals into maximal runs of consecutive indices."""
    out = []
    for topic in sorted(trend_appearances):
        intervals = list(trend_appearances[topic])
        if any(b <= a for a, b in zip(intervals, intervals[1:])):
            raise DomainError(f"appearances of {topic!r} must be sorted and duplicate-free")
        run_start = prev = None
        for t in intervals:
            if run_start is None:
                run_start = t
            elif t != prev + 1:
                out.append(TrendSequence(topic, run_start, prev - run_start + 1))
                run_start = t
            prev = t
        if run_start is not None:
            out.append(TrendSequence(topic, run_start, prev - run_start + 1))
    return out


@dataclass(frozen=True)
class SequenceDistributions:
    counts_per_topic: Counter
    lengths: Counter
    multi_sequence_fraction: float


def sequence_distributions(sequences: Sequence[TrendSequence]) -> SequenceDistributions:
    """Histograms of sequences per topic and of sequence lengths."""
    if not sequences:
        raise DomainError("no sequences given")
    per_topic = Counter(s.topic for s in sequences)
    counts_per_topic = Counter(per_topic.values())
    lengths = Counter(s.length for s in sequences)
    multi = sum(1 for n in per_topic.values() if n > 1) / len(per_topic)
    return SequenceDistributions(counts_per_topic, lengths, multi)


def active_ratio(tweets: Sequence[TweetRecord]) -> float:
    """Tweets per unique author."""
    if not tweets:
        raise DomainError("active_ratio of an empty topic")
    return len(tweets) / len({t.author for t in tweets})


def retweet_credits(tweets: Iterable[TweetRecord]) -> Counter:
    return Counter(t.retweeted_author for t in tweets if t.is_retweet)


def domination_ratio(tweets: Sequence[TweetRecord]) -> float:
    """Share of a topic's retweets credited to its most retweeted author."""
    credits = retweet_credits(tweets)
    total = sum(credits.values())
    if total == 0:
        raise UndefinedDominationError("topic has no retweets")
    return max(credits.values()) / total


def retweet_ratio(author_retweets: int, author_topics: int) -> float:
    if author_topics < 1:
        raise DomainError("retweet_ratio needs at least one topic")
    if author_retweets < 0:
        raise DomainError("retweet count must be non-negative")
    return author_retweets / author_topics


def group_by_topic(stream: Iterable[TweetRecord]) -> dict[str, list[TweetRecord]]:
    by_topic = defaultdict(list)
    for rec in stream:
        by_topic[rec.topic].append(rec)
    return dict(by_topic)


def first_k_initiators(tweets: Sequence[TweetRecord], trend_start: int, k: int = 100, origin: int = 0) -> list[str]:
    """First ``k`` distinct authors to tweet on a topic before it started trending.

    ``tweets`` must be sorted by time; ``trend_start`` is an interval index
    relative to ``origin``.
    """
    if k < 1:
        raise DomainError("k must be positive")
    seen = {}
    for rec in tweets:
        if interval_index(rec.time, origin) >= trend_start:
            break
        seen.setdefault(rec.author, None)
        if len(seen) == k:
            break
    return list(seen)


def author_stats(
    stream: Sequence[TweetRecord],
    initiators: Optional[Mapping[str, Sequence[str]]] = None,
) -> dict[str, AuthorStats]:
    """Per-author activity, retweet credit and the optional ingested attributes.

    ``initiators`` maps topic to the authors who started it (see
    :func:`first_k_initiators`).
    """
    tweet_count = Counter()
    retweets = Counter()
    rt_topics = defaultdict(set)
    followers = {}
    rates = {}
    for rec in stream:
        tweet_count[rec.author] += 1
        if rec.followers is not None:
            followers[rec.author] = rec.followers
        if rec.tweet_rate is not None:
            rates[rec.author] = rec.tweet_rate
        if rec.is_retweet:
            retweets[rec.retweeted_author] += 1
            rt_topics[rec.retweeted_author].add(rec.topic)
    initiated = Counter()
    for authors in (initiators or {}).values():
        initiated.update(set(authors))
    names = set(tweet_count) | set(retweets) | set(initiated)
    return {
        a: AuthorStats(
            a,
            tweet_count=tweet_count[a],
            topics_initiated=initiated[a],
            topics_retweeted_in=len(rt_topics.get(a, ())),
            retweets_received=retweets[a],
            followers=followers.get(a),
            tweet_rate=rates.get(a),
        )
        for a in sorted(names)
    }


def top_retweeted(stream: Sequence[TweetRecord], min_topics: int = 50) -> list[AuthorStats]:
    """Authors credited with retweets in at least ``min_topics`` topics, most influential first.

    Ordered by retweet-ratio, then total retweets (both descending), then author id.
    """
    if min_topics < 1:
        raise DomainError("min_topics must be positive")
    stats = author_stats(stream)
    chosen = [s for s in stats.values() if s.topics_retweeted_in >= min_topics]
    chosen.sort(key=lambda s: (-s.retweet_ratio, -s.retweets_received, s.author))
    return chosen


def topic_metrics(
    tweets: Sequence[TweetRecord],
    sequences: Sequence[TrendSequence] = (),
) -> TopicMetrics:
    """Metrics of one topic; duration is the total length of all its trend sequences."""
    if not tweets:
        raise DomainError("topic has no tweets")
    topic = tweets[0].topic
    credits = retweet_credits(tweets)
    n_rt = sum(credits.values())
    return TopicMetrics(
        topic=topic,
        total_tweets=len(tweets),
        unique_authors=len({t.author for t in tweets}),
        active_ratio=active_ratio(tweets),
        retweet_count=n_rt,
        domination_ratio=max(credits.values()) / n_rt if n_rt else None,
        trend_duration=sum(s.length for s in sequences),
        sequence_count=len(sequences),
    )


@dataclass
class CorrelationReport:
    """Pearson coefficients by pair name; NaN marks a pair that could not be computed."""

    coefficients: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.coefficients[name]


TOPIC_PAIRS = {
    "unique_authors~duration": ("unique_authors", "trend_duration"),
    "total_tweets~unique_authors": ("total_tweets", "unique_authors"),
    "retweet_count~duration": ("retweet_count", "trend_duration"),
    "domination_ratio~duration": ("domination_ratio", "trend_duration"),
}
AUTHOR_PAIRS = {
    "tweet_rate~topics_initiated": ("tweet_rate", "topics_initiated"),
    "followers~topics_initiated": ("followers", "topics_initiated"),
}


def _pair(report: CorrelationReport, name: str, rows, fx: str, fy: str) -> None:
    pairs = [(getattr(r, fx), getattr(r, fy)) for r in rows]
    kept = [(x, y) for x, y in pairs if x is not None and y is not None]
    report.sizes[name] = len(kept)
    if len(kept) < len(pairs):
        report.flags[name] = f"skipped {len(pairs) - len(kept)} rows with missing values"
    if len(kept) < 3:
        report.coefficients[name] = math.nan
        report.flags[name] = f"only {len(kept)} complete rows"
        return
    xs, ys = zip(*kept)
    try:
        report.coefficients[name] = pearson(xs, ys)
    except UndefinedCorrelationError as exc:
        report.coefficients[name] = math.nan
        report.flags[name] = f"undefined: {exc}"


def correlation_report(
    metrics: Sequence[TopicMetrics],
    authors: Sequence[AuthorStats] = (),
) -> CorrelationReport:
    """Correlations between topic size, authorship, retweets and trend duration,
    and between author attributes and the number of topics they initiated."""
    report = CorrelationReport()
    for name, (fx, fy) in TOPIC_PAIRS.items():
        _pair(report, name, metrics, fx, fy)
    for name, (fx, fy) in AUTHOR_PAIRS.items():
        _pair(report, name, authors, fx, fy)
    return report
