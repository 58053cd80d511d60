"""Domain types shared by the simulator, the estimators and the ingest layer."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

INTERVAL_SECONDS = 1200


class TrendlabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TrendlabError, ValueError):
    """An argument lies outside the domain of the operation."""


class UndefinedRatioError(DomainError):
    pass


class InsufficientSampleError(TrendlabError):
    pass


class UndefinedCorrelationError(DomainError):
    pass


class UndefinedDominationError(DomainError):
    pass


class UnsupportedAnalyticFormError(TrendlabError):
    pass


class CorruptInputError(TrendlabError):
    pass


class ResourceLimitError(TrendlabError):
    pass


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def cumulate(counts) -> np.ndarray:
    """Running total of per-interval counts.

    Integer input stays integer; anything else is summed as float64.
    """
    arr = np.asarray(counts)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("cumulate needs a non-empty 1-d sequence of counts")
    if np.any(arr < 0):
        raise DomainError("counts must be non-negative")
    if not np.issubdtype(arr.dtype, np.integer):
        arr = arr.astype(float)
    return np.cumsum(arr)


def interval_index(time: int, origin: int = 0) -> int:
    """Bin a timestamp into its 20-minute interval relative to ``origin``."""
    if time < origin:
        raise DomainError(f"time {time} precedes origin {origin}")
    return (time - origin) // INTERVAL_SECONDS


@dataclass(frozen=True)
class TweetRecord:
    topic: str
    author: str
    time: int
    is_retweet: bool = False
    retweeted_author: Optional[str] = None
    followers: Optional[int] = None
    tweet_rate: Optional[float] = None

    def __post_init__(self):
        if not self.topic or not self.author:
            raise DomainError("topic and author must be non-empty")
        if isinstance(self.time, bool) or not isinstance(self.time, (int, np.integer)) or self.time < 0:
            raise DomainError(f"time must be a non-negative integer, got {self.time!r}")
        if self.is_retweet != (self.retweeted_author is not None):
            raise DomainError("retweeted_author must be present exactly when is_retweet is true")
        if self.retweeted_author is not None and (
            not self.retweeted_author or self.retweeted_author == self.author
        ):
            raise DomainError("retweeted_author must be non-empty and differ from author")
        if self.followers is not None and self.followers < 0:
            raise DomainError("followers must be non-negative")
        if self.tweet_rate is not None and self.tweet_rate < 0:
            raise DomainError("tweet_rate must be non-negative")


@dataclass(frozen=True, eq=False)
class TopicSeries:
    """Per-interval counts n_q(t) of one topic and their running total N_q(t).

    ``integral`` marks series that came from ingested tweets, whose counts
    are whole numbers; simulated series carry real-valued counts.
    """

    topic: str
    counts: np.ndarray
    cumulative: np.ndarray
    integral: bool = False

    def __post_init__(self):
        counts = _frozen(self.counts)
        cumulative = _frozen(self.cumulative)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "cumulative", cumulative)
        if counts.ndim != 1 or counts.size == 0 or counts.shape != cumulative.shape:
            raise DomainError("counts and cumulative must be non-empty and of equal length")
        if np.any(counts < 0):
            raise DomainError("counts must be non-negative")
        if not np.allclose(np.cumsum(counts), cumulative, rtol=1e-9, atol=1e-9):
            raise DomainError("cumulative is not the running sum of counts")

    @classmethod
    def from_counts(cls, topic: str, counts, integral: bool = False) -> "TopicSeries":
        return cls(topic, counts, cumulate(counts), integral)

    @classmethod
    def from_cumulative(cls, topic: str, cumulative) -> "TopicSeries":
        cum = np.asarray(cumulative, dtype=float)
        counts = np.diff(cum, prepend=0.0)
        # diff of a non-decreasing float series can dip to -ulp
        counts[counts < 0] = 0.0
        return cls(topic, counts, cum)

    def __len__(self) -> int:
        return self.counts.size

    def __eq__(self, other):
        if not isinstance(other, TopicSeries):
            return NotImplemented
        return (
            self.topic == other.topic
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.cumulative, other.cumulative)
        )

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def window(self, start: int, stop: int) -> "TopicSeries":
        """Restrict to intervals ``start <= t < stop``; counts are kept as-is."""
        return TopicSeries.from_counts(self.topic, self.counts[start:stop], self.integral)


def ratio(series: TopicSeries, t_i: int, t_j: int) -> float:
    """Cumulative ratio N_q(t_i) / N_q(t_j) for ``t_i > t_j``."""
    if t_i <= t_j:
        raise DomainError(f"need t_i > t_j, got t_i={t_i}, t_j={t_j}")
    if t_j < 0 or t_i >= len(series):
        raise DomainError(f"interval out of range for series of length {len(series)}")
    denom = series.cumulative[t_j]
    if denom <= 0:
        raise UndefinedRatioError(f"N({t_j}) = 0 for topic {series.topic!r}")
    return float(series.cumulative[t_i] / denom)


@dataclass(frozen=True)
class TrendSequence:
    """One contiguous trending run of a topic.

    Runs produced by the stop rule may have length 0 (the topic failed on
    its first evaluated step) and may be right-censored by the horizon.
    """

    topic: str
    start: int
    length: int
    series: Optional[TopicSeries] = field(default=None, compare=False)
    censored: bool = False

    def __post_init__(self):
        if self.start < 0 or self.length < 0:
            raise DomainError("start and length must be non-negative")

    @property
    def stop(self) -> int:
        return self.start + self.length


class NoiseKind(str, Enum):
    LOGNORMAL = "lognormal"
    GAMMA = "gamma"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class NoiseSpec:
    """Distribution of the multiplicative noise: positive, mean 1, variance ``sigma2``."""

    kind: NoiseKind = NoiseKind.LOGNORMAL
    sigma2: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not np.isfinite(self.sigma2) or self.sigma2 < 0:
            raise DomainError(f"sigma2 must be non-negative, got {self.sigma2}")
        if (self.sigma2 == 0) != (self.kind is NoiseKind.DEGENERATE):
            raise DomainError("sigma2 = 0 exactly when the noise is degenerate")

    @property
    def log_scale(self) -> float:
        """Standard deviation s of ln(xi) for lognormal noise."""
        return float(np.sqrt(np.log1p(self.sigma2)))

    @property
    def log_location(self) -> float:
        """Mean mu of ln(xi) for lognormal noise (chosen so E[xi] = 1)."""
        return -0.5 * float(np.log1p(self.sigma2))


@dataclass(frozen=True)
class ModelParams:
    """Simulator configuration.

    ``constant_gamma_after`` switches on the survival mode: past that
    interval the novelty factor is frozen at ``gamma_scale / constant_gamma_after``
    and the stop rule compares the recovered noise (phi - 1) / gamma against
    ``theta`` instead of the raw growth rate phi.
    """

    n_topics: int = 1000
    n_intervals: int = 96
    n0: float = 1.0
    gamma_scale: float = 1.0
    sigma2: float = 0.25
    theta: float = 1.05
    noise_kind: NoiseKind = NoiseKind.LOGNORMAL
    seed: int = 0
    burn_in: int = 10
    constant_gamma_after: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "noise_kind", NoiseKind(self.noise_kind))
        if self.n_topics < 1 or self.n_intervals < 1:
            raise DomainError("n_topics and n_intervals must be positive")
        if not self.n0 > 0:
            raise DomainError("n0 must be positive")
        if not self.gamma_scale >= 0:
            raise DomainError("gamma_scale must be non-negative")
        if not self.theta > 0:
            raise DomainError("theta must be positive")
        if not self.theta < 1 + self.gamma_scale:
            raise DomainError("theta must be below 1 + gamma_scale")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if self.burn_in < 0:
            raise DomainError("burn_in must be non-negative")
        if self.constant_gamma_after is not None and self.constant_gamma_after < 1:
            raise DomainError("constant_gamma_after must be at least 1")
        # validates sigma2 against noise_kind
        self.noise

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.noise_kind, self.sigma2)

    def gamma(self, t):
        """Novelty factor gamma(t) for t >= 1 (scalar or array)."""
        t = np.asarray(t, dtype=float)
        if self.constant_gamma_after is not None:
            t = np.minimum(t, self.constant_gamma_after)
        return self.gamma_scale / t


@dataclass(frozen=True)
class FitResult:
    params: dict
    r_squared: float
    residuals: np.ndarray
    n_points: int

    def __post_init__(self):
        object.__setattr__(self, "residuals", _frozen(self.residuals))
        if self.n_points != self.residuals.size:
            raise DomainError("n_points must equal the number of residuals")

    def __getitem__(self, name: str) -> float:
        return self.params[name]


@dataclass(frozen=True, eq=False)
class RatioSample:
    """Cumulative ratios C_q(t_i, t_j) over the topics where N_q(t_j) > 0."""

    t_i: int
    t_j: int
    values: np.ndarray
    excluded: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.t_i <= self.t_j:
            raise DomainError("t_i must exceed t_j")
        if np.any(self.values < 1):
            raise DomainError("cumulative ratios are at least 1")

    @property
    def log_values(self) -> np.ndarray:
        return np.log(self.values)
