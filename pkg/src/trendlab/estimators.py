"""Estimators that recover the growth, normality and survival signatures from series data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .core import (
    DomainError,
    FitResult,
    InsufficientSampleError,
    NoiseKind,
    NoiseSpec,
    RatioSample,
    TopicSeries,
    UndefinedCorrelationError,
    UnsupportedAnalyticFormError,
)


def normal_cdf(x):
    """Standard normal CDF."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("normal_quantile needs p strictly inside (0, 1)")
    out = special.ndtri(arr)
    return float(out) if out.ndim == 0 else out


def least_squares_line(x, y) -> FitResult:
    """Ordinary least-squares line ``y = slope * x + intercept``.

    R^2 is 1 - SS_res / SS_tot, taken as 1 when y is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise DomainError("x and y must be non-empty 1-d arrays of equal length")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    slope = float(dx @ (y - ym)) / sxx if sxx > 0 else 0.0
    intercept = float(ym - slope * xm)
    residuals = y - (slope * x + intercept)
    ss_res = float(residuals @ residuals)
    ss_tot = float((y - ym) @ (y - ym))
    if ss_tot == 0:
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult({"slope": slope, "intercept": intercept}, r_squared, residuals, residuals.size)


# --- decay factor -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GammaSeries:
    """Measured novelty factor; intervals no topic covers are simply absent."""

    t: np.ndarray
    gamma: np.ndarray
    n_topics: np.ndarray

    def __post_init__(self):
        if not (len(self.t) == len(self.gamma) == len(self.n_topics)):
            raise DomainError("t, gamma and n_topics must have equal lengths")
        if np.any(self.gamma <= -1):
            raise DomainError("gamma must exceed -1")

    def as_dict(self) -> dict:
        return dict(zip(self.t.tolist(), self.gamma.tolist()))


def measure_gamma(cohort: Sequence[TopicSeries]) -> GammaSeries:
    """Cross-topic mean of N(t)/N(t-1), minus one, for every t >= 1."""
    if len(cohort) < 2:
        raise InsufficientSampleError("measure_gamma needs at least two topics")
    horizon = max(len(s) for s in cohort)
    sums = np.zeros(horizon)
    counts = np.zeros(horizon, dtype=int)
    for s in cohort:
        if len(s) < 2:
            raise DomainError(f"series {s.topic!r} is shorter than two intervals")
        prev, cur = s.cumulative[:-1], s.cumulative[1:]
        ok = prev > 0
        idx = np.flatnonzero(ok) + 1
        sums[idx] += cur[ok] / prev[ok]
        counts[idx] += 1
    present = np.flatnonzero(counts > 0)
    present = present[present >= 1]
    gamma = sums[present] / counts[present] - 1.0
    return GammaSeries(present, gamma, counts[present])


def default_gamma_window(horizon: int) -> tuple[float, float]:
    """Fit range for the decay power law: skip the early transient and the sparse tail."""
    return 5.0, 0.8 * horizon


def fit_power_law(x, y, window: Optional[tuple[float, float]] = None) -> FitResult:
    """Least squares on (ln x, ln y), restricted to ``lo <= x <= hi`` when a window is given."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError("x and y must have equal lengths")
    if window is not None:
        lo, hi = window
        keep = (x >= lo) & (x <= hi)
        x, y = x[keep], y[keep]
    if x.size < 3:
        raise InsufficientSampleError("power-law fit needs at least three points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("power-law fit needs positive x and y")
    return least_squares_line(np.log(x), np.log(y))


# --- distribution of cumulative ratios --------------------------------------


def log_ratio_sample(cohort: Sequence[TopicSeries], t_i: int, t_j: int, min_topics: int = 10) -> RatioSample:
    """C_q(t_i, t_j) over topics with N_q(t_j) > 0; use ``.log_values`` for ln C."""
    if t_i <= t_j:
        raise DomainError(f"need t_i > t_j, got {t_i} and {t_j}")
    values = []
    excluded = 0
    for s in cohort:
        if len(s) <= t_i or s.cumulative[t_j] <= 0:
            excluded += 1
            continue
        values.append(s.cumulative[t_i] / s.cumulative[t_j])
    if len(values) < min_topics:
        raise InsufficientSampleError(f"only {len(values)} topics qualify, need {min_topics}")
    return RatioSample(t_i, t_j, np.array(values), excluded)


def _standardized(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 3:
        raise InsufficientSampleError("need at least three values")
    centered = v - v.mean()
    if not np.any(centered):
        raise DomainError("values have zero variance")
    return centered


def moment_normality(values) -> dict:
    """Sample skewness m3 / m2^1.5 and excess kurtosis m4 / m2^2 - 3 (population moments)."""
    d = _standardized(values)
    m2 = np.mean(d**2)
    if m2 == 0:
        raise DomainError("values have zero variance")
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    return {"skewness": float(m3 / m2**1.5), "excess_kurtosis": float(m4 / m2**2 - 3.0)}


def plotting_positions(n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.5) / n


def qq_points(values) -> np.ndarray:
    """Normal Q-Q pairs as an ``(n, 2)`` array of (theoretical, sample) quantiles.

    Theoretical quantiles sit at plotting positions (i - 0.5) / n. The sorted
    sample is centred on its mean and rescaled so its standard deviation
    equals that of the theoretical quantiles; any sample that is an affine
    image of those quantiles therefore lands exactly on the identity line.
    """
    d = np.sort(_standardized(values))
    q = special.ndtri(plotting_positions(d.size))
    sample = d * (q.std() / d.std()) + q.mean()
    return np.column_stack([q, sample])


def qq_max_deviation(points: np.ndarray, central: float = 0.95) -> float:
    """Largest |sample - theoretical| over the central fraction of Q-Q points."""
    n = len(points)
    cut = int(np.floor(n * (1.0 - central) / 2.0))
    inner = points[cut : n - cut]
    return float(np.max(np.abs(inner[:, 1] - inner[:, 0])))


def silverman_bandwidth(values) -> float:
    v = np.asarray(values, dtype=float)
    sd = v.std(ddof=1)
    iqr = np.subtract(*np.percentile(v, [75, 25]))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return float(0.9 * spread * v.size ** (-0.2))


def gaussian_kde(values, eval_points, bandwidth: Optional[float] = None) -> np.ndarray:
    """Gaussian kernel density estimate, Silverman's rule bandwidth by default."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise InsufficientSampleError("kde needs at least two values")
    if np.all(v == v[0]):
        raise DomainError("values have zero variance")
    h = silverman_bandwidth(v) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise DomainError("bandwidth must be positive")
    x = np.atleast_1d(np.asarray(eval_points, dtype=float))
    out = np.empty(x.size)
    norm = 1.0 / (v.size * h * np.sqrt(2.0 * np.pi))
    # chunked so the kernel matrix stays small for large samples
    step = max(1, 4_000_000 // v.size)
    for lo in range(0, x.size, step):
        z = (x[lo : lo + step, None] - v[None, :]) / h
        out[lo : lo + step] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    return out


# --- growth linearity --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    t: np.ndarray
    mean: np.ndarray
    n_topics: np.ndarray


def normalized_second_derivative(cohort: Sequence[TopicSeries], min_duration: int = 0) -> CurvatureProfile:
    """Cross-topic mean of N(t+1) - 2N(t) + N(t-1), each topic scaled by its mean N.

    Only series with at least ``max(3, min_duration)`` intervals contribute.
    """
    need = max(3, min_duration)
    horizon = max((len(s) for s in cohort), default=0)
    sums = np.zeros(horizon)
    counts = np.zeros(horizon, dtype=int)
    used = 0
    for s in cohort:
        if len(s) < need:
            continue
        cum = s.cumulative
        scale = cum.mean()
        if scale <= 0:
            continue
        d2 = (cum[2:] - 2.0 * cum[1:-1] + cum[:-2]) / scale
        sums[1 : len(s) - 1] += d2
        counts[1 : len(s) - 1] += 1
        used += 1
    if used == 0:
        raise InsufficientSampleError("no series qualifies for the curvature profile")
    t = np.flatnonzero(counts)
    return CurvatureProfile(t, sums[t] / counts[t], counts[t])


# --- correlation --------------------------------------------------------------


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be 1-d and of equal length")
    if x.size < 3:
        raise InsufficientSampleError("pearson needs at least three pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant input")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


# --- survival of long-trending topics ------------------------------------------


def stop_probability(theta: float, noise: NoiseSpec) -> float:
    """Per-step probability Pr(xi < theta) that a long-trending topic stops."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    if noise.kind is NoiseKind.DEGENERATE:
        return 1.0 if theta > 1.0 else 0.0
    if noise.kind is not NoiseKind.LOGNORMAL:
        raise UnsupportedAnalyticFormError(
            f"no closed-form CDF for {noise.kind.value} noise; use the empirical stop frequency"
        )
    return normal_cdf((np.log(theta) - noise.log_location) / noise.log_scale)


def survival_threshold(p: float, noise: NoiseSpec) -> float:
    """Threshold theta whose per-step stop probability is ``p``."""
    if not 0 < p < 1:
        raise DomainError("p must lie strictly inside (0, 1)")
    if noise.kind is not NoiseKind.LOGNORMAL:
        raise UnsupportedAnalyticFormError("survival_threshold needs lognormal noise")
    return float(np.exp(noise.log_location + noise.log_scale * normal_quantile(p)))


def expected_duration(p: float) -> float:
    """Mean of the geometric law Pr(L = k) = (1 - p)^k p."""
    if not 0 < p < 1:
        raise DomainError("p must lie strictly inside (0, 1)")
    return 1.0 / p - 1.0


@dataclass(frozen=True, eq=False)
class DurationSample:
    """Trending durations in intervals; only durations >= ``truncation`` were kept."""

    durations: np.ndarray
    truncation: int = 0

    def __post_init__(self):
        d = np.asarray(self.durations)
        if d.ndim != 1:
            raise DomainError("durations must be 1-d")
        if d.size and (np.any(d < 0) or np.any(d != np.floor(d))):
            raise DomainError("durations must be non-negative integers")
        d = d.astype(np.int64)
        d.setflags(write=False)
        object.__setattr__(self, "durations", d)
        if self.truncation < 0:
            raise DomainError("truncation must be non-negative")
        if np.any(d < self.truncation):
            raise DomainError("every duration must be at least the truncation")

    @property
    def shifted(self) -> np.ndarray:
        return self.durations - self.truncation

    def histogram(self, bin_width: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Left edges, counts and densities of the shifted durations."""
        if bin_width < 1:
            raise DomainError("bin_width must be a positive integer")
        d = self.shifted
        counts = np.bincount(d // bin_width)
        edges = np.arange(counts.size) * bin_width
        density = counts / (d.size * bin_width)
        return edges, counts, density


def geometric_log_likelihood(p, shifted) -> np.ndarray:
    """Log-likelihood of shifted durations under Pr(L = k) = (1 - p)^k p."""
    p = np.asarray(p, dtype=float)
    total = float(np.sum(shifted))
    n = len(shifted)
    with np.errstate(divide="ignore"):
        return n * np.log(p) + total * np.log1p(-p)


def fit_log_density(edges, density) -> FitResult:
    """Line through (duration, ln density) over the non-empty bins."""
    edges = np.asarray(edges, dtype=float)
    density = np.asarray(density, dtype=float)
    keep = density > 0
    return least_squares_line(edges[keep], np.log(density[keep]))


def fit_exponential_tail(sample: DurationSample, bin_width: int = 1) -> FitResult:
    """Log-linear fit of the duration histogram; the slope estimates ln(1 - p)."""
    edges, counts, density = sample.histogram(bin_width)
    if np.count_nonzero(counts) < 3:
        raise InsufficientSampleError("exponential tail fit needs at least three non-empty bins")
    return fit_log_density(edges, density)


def fit_geometric(sample: DurationSample, min_samples: int = 10) -> FitResult:
    """Maximum-likelihood geometric fit after shifting out the truncation.

    p = 1 / (1 + mean shifted duration). ``r_squared`` and residuals come
    from the log-density line over the non-empty histogram bins (a line
    through one or two bins is exact).
    """
    d = sample.shifted
    if d.size == 0:
        raise InsufficientSampleError("no durations to fit")
    if d.size < min_samples:
        raise InsufficientSampleError(f"need at least {min_samples} durations, got {d.size}")
    mean = float(d.mean())
    p = 1.0 / (1.0 + mean)
    edges, _, density = sample.histogram()
    tail = fit_log_density(edges, density)
    return FitResult(
        {"p": p, "mean": mean, "slope": tail["slope"], "intercept": tail["intercept"]},
        tail.r_squared,
        tail.residuals,
        tail.n_points,
    )
