"""Synthetic topic trajectories under multiplicative noise with novelty decay."""

from __future__ import annotations

import numpy as np

from .core import (
    DomainError,
    ModelParams,
    NoiseKind,
    NoiseSpec,
    ResourceLimitError,
    TopicSeries,
    TrendSequence,
)

MAX_CELLS = 200_000_000

# substream purposes, second word of the per-topic key
NOISE_STREAM = 0
EMISSION_STREAM = 1


def topic_stream(seed: int, topic_id: int, purpose: int = NOISE_STREAM) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, topic_id, purpose)``.

    Streams for different topics never share state, so a topic simulated on
    its own matches the same topic inside any cohort.
    """
    seq = np.random.SeedSequence(seed, spawn_key=(topic_id, purpose))
    return np.random.Generator(np.random.Philox(seq))


def sample_noise(spec: NoiseSpec, stream: np.random.Generator, size=None):
    """Draw positive noise with mean 1 and variance ``spec.sigma2``."""
    if spec.sigma2 < 0:
        raise DomainError("sigma2 must be non-negative")
    if spec.kind is NoiseKind.DEGENERATE:
        return 1.0 if size is None else np.ones(size)
    if spec.kind is NoiseKind.LOGNORMAL:
        return np.exp(stream.normal(spec.log_location, spec.log_scale, size))
    shape = 1.0 / spec.sigma2
    return stream.gamma(shape, 1.0 / shape, size)


def simulate_topic(params: ModelParams, topic_id: int) -> TopicSeries:
    """Run N(t) = [1 + gamma(t) xi(t)] N(t-1) from N(0) = n0 for ``n_intervals`` steps."""
    if not 0 <= topic_id < params.n_topics:
        raise DomainError(f"topic_id {topic_id} outside [0, {params.n_topics})")
    stream = topic_stream(params.seed, topic_id)
    xi = sample_noise(params.noise, stream, params.n_intervals)
    t = np.arange(1, params.n_intervals + 1)
    growth = 1.0 + params.gamma(t) * xi
    cumulative = np.empty(params.n_intervals + 1)
    cumulative[0] = params.n0
    cumulative[1:] = params.n0 * np.cumprod(growth)
    return TopicSeries.from_cumulative(f"topic-{topic_id}", cumulative)


def growth_statistic(series: TopicSeries, gamma=None) -> np.ndarray:
    """Relative growth phi_t = N_t / N_{t-1} for t = 1..len-1.

    With ``gamma`` (a constant or a callable of t) the statistic becomes
    (phi_t - 1) / gamma(t), i.e. the noise draw that produced the step.
    """
    cum = series.cumulative
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = cum[1:] / cum[:-1]
    # 0/0 is a dead step; x/0 with x > 0 is unbounded growth
    phi = np.where(np.isnan(phi), 0.0, phi)
    if gamma is None:
        return phi
    t = np.arange(1, cum.size, dtype=float)
    g = gamma(t) if callable(gamma) else np.full_like(t, float(gamma))
    return (phi - 1.0) / g


def apply_stop_rule(series: TopicSeries, theta: float, burn_in: int = 10, gamma=None) -> TrendSequence:
    """Trending run that ends at the first step after ``burn_in`` whose growth falls below ``theta``.

    The run starts at ``burn_in + 1`` and counts the surviving steps before
    the failing one. A run that never fails is right-censored at the horizon.
    """
    if burn_in < 0 or burn_in >= len(series):
        raise DomainError(f"burn_in {burn_in} must lie in [0, {len(series)})")
    stat = growth_statistic(series, gamma)[burn_in:]
    failed = np.flatnonzero(stat < theta)
    start = burn_in + 1
    if failed.size:
        length = int(failed[0])
        censored = False
    else:
        length = stat.size
        censored = True
    return TrendSequence(
        series.topic,
        start,
        length,
        series=series.window(start, start + length) if length else None,
        censored=censored,
    )


def stop_sequence(params: ModelParams, series: TopicSeries) -> TrendSequence:
    """Stop rule as configured by ``params`` (survival mode or raw growth rate)."""
    burn_in = min(params.burn_in, params.n_intervals)
    if params.constant_gamma_after is not None:
        return apply_stop_rule(series, params.theta, burn_in, gamma=params.gamma)
    return apply_stop_rule(series, params.theta, burn_in)


def simulate_cohort(params: ModelParams) -> tuple[list[TopicSeries], list[TrendSequence]]:
    """Simulate every topic and its trending run, ordered by topic id."""
    if params.n_topics * (params.n_intervals + 1) > MAX_CELLS:
        raise ResourceLimitError(
            f"{params.n_topics} topics x {params.n_intervals} intervals exceeds {MAX_CELLS} cells"
        )
    series = [simulate_topic(params, q) for q in range(params.n_topics)]
    sequences = [stop_sequence(params, s) for s in series]
    return series, sequences
