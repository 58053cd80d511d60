"""Simulation and statistical analysis of trending-topic dynamics."""

__version__ = "0.1.0"

from .core import (
    FitResult,
    ModelParams,
    NoiseKind,
    NoiseSpec,
    RatioSample,
    TopicSeries,
    TrendSequence,
    TweetRecord,
    cumulate,
    ratio,
)
from .sim import apply_stop_rule, sample_noise, simulate_cohort, simulate_topic

__all__ = [
    "FitResult",
    "ModelParams",
    "NoiseKind",
    "NoiseSpec",
    "RatioSample",
    "TopicSeries",
    "TrendSequence",
    "TweetRecord",
    "apply_stop_rule",
    "cumulate",
    "ratio",
    "sample_noise",
    "simulate_cohort",
    "simulate_topic",
]
