"""Command line entry point: simulate cohorts, analyze them, and summarize the fits.

Exit codes: 0 success, 1 runtime or data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import DomainError, ModelParams, NoiseKind, NoiseSpec, TrendlabError
from .estimators import (
    DurationSample,
    default_gamma_window,
    expected_duration,
    fit_exponential_tail,
    fit_geometric,
    fit_power_law,
    gaussian_kde,
    log_ratio_sample,
    measure_gamma,
    moment_normality,
    normalized_second_derivative,
    qq_max_deviation,
    qq_points,
    survival_threshold,
)
from .ingest import (
    bin_intervals,
    emit_cohort,
    fmt,
    load_trend_appearances,
    parse_stream,
    read_durations,
    read_series,
    write_durations,
    write_series,
    write_stream,
    write_trend_appearances,
)
from .metrics import (
    FOUR_HOURS,
    author_stats,
    correlation_report,
    first_k_initiators,
    group_by_topic,
    sequence_distributions,
    split_sequences,
    topic_metrics,
)
from .sim import simulate_cohort

log = logging.getLogger("trendlab")

STREAM_FILE = "stream.jsonl"
SERIES_FILE = "series.csv"
DURATIONS_FILE = "durations.csv"
APPEARANCES_FILE = "appearances.csv"
MANIFEST_FILE = "manifest.json"
SECTIONS = ("gamma", "ratios", "curvature", "durations", "sequences", "metrics")
DEFAULT_PAIRS = "14:2,10:2,14:4,10:4"

# reference values from the original Twitter study, quoted in reports
REFERENCE_GAMMA = "exponent -1, R^2 = 0.98"
REFERENCE_GEOMETRIC = "p = 0.12"
REFERENCE_TAIL = "R^2 = 0.9112"
REFERENCE_CORRELATIONS = {
    "unique_authors~duration": 0.80,
    "total_tweets~unique_authors": 0.83,
    "retweet_count~duration": 0.96,
    "domination_ratio~duration": -0.19,
    "tweet_rate~topics_initiated": 0.22,
    "followers~topics_initiated": 0.01,
}


class UsageError(Exception):
    pass


# --- tables -------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def write_table(path: Path, header: dict, columns: list, rows) -> None:
    """CSV preceded by ``# key=value`` lines carrying the fit summary."""
    with path.open("w", encoding="utf-8", newline="") as fh:
        for key, value in header.items():
            fh.write(f"# {key}={_cell(value)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def read_table_header(path: Path) -> dict:
    header = {}
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition("=")
            header[key] = value
    return header


# --- input resolution -------------------------------------------------------------


def _resolve(path: Path, name: str) -> Path:
    target = path / name if path.is_dir() else path
    if not target.exists():
        raise FileNotFoundError(f"missing input: {target}")
    return target


def load_cohort(path: Path):
    """Series from a series CSV, a stream file, or a directory holding either."""
    if path.is_dir():
        if (path / SERIES_FILE).exists():
            path = path / SERIES_FILE
        else:
            path = _resolve(path, STREAM_FILE)
    if not path.exists():
        raise FileNotFoundError(f"missing input: {path}")
    if path.suffix == ".csv":
        return read_series(path)
    records, _ = parse_stream(path)
    series, _ = bin_intervals(records)
    return list(series.values())


# --- simulate --------------------------------------------------------------------


def _seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("TRENDLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"TRENDLAB_SEED={env!r} is not an integer")


def params_from_args(args) -> ModelParams:
    noise = NoiseKind(args.noise)
    sigma2 = args.sigma2
    if sigma2 is None:
        sigma2 = 0.0 if noise is NoiseKind.DEGENERATE else 0.25
    theta = args.theta
    try:
        if args.stop_p is not None:
            if args.constant_gamma_after is None:
                raise UsageError("--stop-p needs --constant-gamma-after")
            theta = survival_threshold(args.stop_p, NoiseSpec(noise, sigma2))
        return ModelParams(
            n_topics=args.topics,
            n_intervals=args.intervals,
            n0=args.n0,
            gamma_scale=args.gamma_c,
            sigma2=sigma2,
            theta=theta,
            noise_kind=noise,
            seed=_seed(args.seed),
            burn_in=args.burn_in,
            constant_gamma_after=args.constant_gamma_after,
        )
    except (DomainError, TrendlabError) as exc:
        raise UsageError(str(exc))


def cmd_simulate(args) -> int:
    params = params_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series, sequences = simulate_cohort(params)
    write_series(out / SERIES_FILE, series)
    write_durations(out / DURATIONS_FILE, sequences)
    write_trend_appearances(out / APPEARANCES_FILE, {seq.topic: range(seq.stop) for seq in sequences})
    files = [SERIES_FILE, DURATIONS_FILE, APPEARANCES_FILE]
    if not args.no_stream:
        records = emit_cohort(series, params.seed, n_authors=args.authors, retweet_prob=args.retweet_prob)
        write_stream(out / STREAM_FILE, records)
        files.append(STREAM_FILE)
    manifest = {
        "command": "simulate",
        "params": {
            "n_topics": params.n_topics,
            "n_intervals": params.n_intervals,
            "n0": params.n0,
            "gamma_scale": params.gamma_scale,
            "sigma2": params.sigma2,
            "theta": params.theta,
            "noise_kind": params.noise_kind.value,
            "seed": params.seed,
            "burn_in": params.burn_in,
            "constant_gamma_after": params.constant_gamma_after,
            "stop_p": args.stop_p,
            "authors": args.authors,
            "retweet_prob": args.retweet_prob,
        },
        "files": sorted(files),
        "versions": {"trendlab": __version__, "numpy": np.__version__, "python": platform.python_version()},
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


# --- analyze ---------------------------------------------------------------------


def analyze_gamma(src: Path, out: Path, args) -> None:
    cohort = load_cohort(src)
    g = measure_gamma(cohort)
    horizon = max(len(s) for s in cohort) - 1
    lo, hi = args.window if args.window else default_gamma_window(horizon)
    keep = g.gamma > 0
    fit = fit_power_law(g.t[keep], g.gamma[keep], (lo, hi))
    slope, intercept = fit["slope"], fit["intercept"]
    rows = [
        (int(t), float(v), int(n), float(np.exp(intercept) * t**slope))
        for t, v, n in zip(g.t, g.gamma, g.n_topics)
    ]
    header = {
        "slope": slope,
        "intercept": intercept,
        "r_squared": fit.r_squared,
        "window_lo": float(lo),
        "window_hi": float(hi),
        "n_topics": len(cohort),
    }
    write_table(out / "gamma.csv", header, ["t", "gamma", "n_topics", "fitted"], rows)


def _pairs(spec: str):
    pairs = []
    for item in spec.split(","):
        a, _, b = item.partition(":")
        pairs.append((int(a), int(b)))
    return pairs


def analyze_ratios(src: Path, out: Path, args) -> None:
    cohort = load_cohort(src)
    header = {}
    rows = []
    for t_i, t_j in _pairs(args.pairs):
        name = f"{t_i}:{t_j}"
        sample = log_ratio_sample(cohort, t_i, t_j)
        values = sample.log_values
        moments = moment_normality(values)
        qq = qq_points(values)
        header[f"{name}.n"] = values.size
        header[f"{name}.excluded"] = sample.excluded
        header[f"{name}.skewness"] = moments["skewness"]
        header[f"{name}.excess_kurtosis"] = moments["excess_kurtosis"]
        header[f"{name}.qq_max_dev"] = qq_max_deviation(qq)
        rows.extend((name, "value", float(v), "") for v in values)
        spread = values.std()
        grid = np.linspace(values.min() - 3 * spread, values.max() + 3 * spread, args.grid)
        rows.extend((name, "kde", float(x), float(d)) for x, d in zip(grid, gaussian_kde(values, grid)))
        rows.extend((name, "qq", float(x), float(y)) for x, y in qq)
    write_table(out / "ratios.csv", header, ["pair", "kind", "x", "y"], rows)


def analyze_curvature(src: Path, out: Path, args) -> None:
    cohort = load_cohort(src)
    every = normalized_second_derivative(cohort)
    try:
        long = normalized_second_derivative(cohort, min_duration=args.long_min)
        long_map = dict(zip(long.t.tolist(), zip(long.mean.tolist(), long.n_topics.tolist())))
    except TrendlabError:
        long_map = {}
    rows = []
    for t, m, n in zip(every.t, every.mean, every.n_topics):
        lm, ln = long_map.get(int(t), ("", 0))
        rows.append((int(t), float(m), int(n), lm, ln))
    late = every.t >= args.from_t
    header = {
        "max_abs_mean_from_t": float(np.max(np.abs(every.mean[late]))) if late.any() else float("nan"),
        "from_t": args.from_t,
        "long_min_intervals": args.long_min,
    }
    write_table(out / "curvature.csv", header, ["t", "mean_all", "n_all", "mean_long", "n_long"], rows)


def analyze_durations(src: Path, out: Path, args) -> None:
    sequences = read_durations(_resolve(src, DURATIONS_FILE))
    lengths = np.array([s.length for s in sequences if not s.censored], dtype=np.int64)
    censored = sum(s.censored for s in sequences)
    lengths = lengths[lengths >= args.truncation]
    sample = DurationSample(lengths, args.truncation)
    geo = fit_geometric(sample)
    tail = fit_exponential_tail(sample)
    edges, counts, density = sample.histogram()
    p = geo["p"]
    rows = [
        (int(e) + args.truncation, int(c), float(d), float(p * (1 - p) ** e))
        for e, c, d in zip(edges, counts, density)
    ]
    header = {
        "n": lengths.size,
        "censored": int(censored),
        "truncation": args.truncation,
        "p_hat": p,
        "mean": geo["mean"],
        "expected_duration": expected_duration(p) if 0 < p < 1 else float("nan"),
        "slope": tail["slope"],
        "intercept": tail["intercept"],
        "r_squared": tail.r_squared,
        "p_from_slope": 1.0 - float(np.exp(tail["slope"])),
    }
    write_table(out / "durations.csv", header, ["duration", "count", "density", "geometric"], rows)


def analyze_sequences(src: Path, out: Path, args) -> None:
    appearances = load_trend_appearances(_resolve(src, APPEARANCES_FILE))
    sequences = split_sequences(appearances)
    dist = sequence_distributions(sequences)
    header = {
        "n_topics": len(appearances),
        "n_sequences": len(sequences),
        "multi_sequence_fraction": dist.multi_sequence_fraction,
    }
    lengths = sorted(dist.lengths.items())
    if len(lengths) >= 3:
        x, y = zip(*lengths)
        fit = fit_power_law(x, y)
        header["length_slope"] = fit["slope"]
        header["length_r_squared"] = fit.r_squared
    rows = [("sequences_per_topic", k, v) for k, v in sorted(dist.counts_per_topic.items())]
    rows += [("length", k, v) for k, v in lengths]
    write_table(out / "sequences.csv", header, ["kind", "value", "count"], rows)


def analyze_metrics(src: Path, out: Path, args) -> None:
    records, _ = parse_stream(_resolve(src, STREAM_FILE))
    records.sort(key=lambda r: r.time)
    origin = min((r.time for r in records), default=0)
    by_topic = group_by_topic(records)
    apps_path = src / APPEARANCES_FILE if src.is_dir() else None
    appearances = load_trend_appearances(apps_path) if apps_path and apps_path.exists() else {}
    sequences = {}
    for seq in split_sequences(appearances):
        sequences.setdefault(seq.topic, []).append(seq)
    initiators = {
        topic: first_k_initiators(tweets, appearances[topic][0], args.k, origin)
        for topic, tweets in by_topic.items()
        if appearances.get(topic)
    }
    metrics = [topic_metrics(by_topic[t], sequences.get(t, ())) for t in sorted(by_topic)]
    authors = list(author_stats(records, initiators).values())
    report = correlation_report(metrics, authors)
    header = {}
    for name, value in report.coefficients.items():
        header[f"corr.{name}"] = value
        header[f"n.{name}"] = report.sizes[name]
    for name, note in report.flags.items():
        header[f"flag.{name}"] = note
    n_rt = sum(m.retweet_count for m in metrics)
    header["retweet_fraction"] = n_rt / len(records) if records else float("nan")
    columns = ["topic", "total_tweets", "unique_authors", "active_ratio", "retweet_count",
               "domination_ratio", "trend_duration", "sequence_count"]
    rows = [
        (m.topic, m.total_tweets, m.unique_authors, float(m.active_ratio), m.retweet_count,
         "" if m.domination_ratio is None else float(m.domination_ratio), m.trend_duration, m.sequence_count)
        for m in metrics
    ]
    write_table(out / "metrics.csv", header, columns, rows)


ANALYZERS = {
    "gamma": analyze_gamma,
    "ratios": analyze_ratios,
    "curvature": analyze_curvature,
    "durations": analyze_durations,
    "sequences": analyze_sequences,
    "metrics": analyze_metrics,
}


def cmd_analyze(args) -> int:
    src = Path(args.input)
    if not src.exists():
        raise FileNotFoundError(f"missing input: {src}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = SECTIONS if args.what == "all" else (args.what,)
    for name in names:
        ANALYZERS[name](src, out, args)
    return 0


# --- report ----------------------------------------------------------------------


def _f(header: dict, key: str) -> float:
    return float(header.get(key, "nan"))


def _check(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def cmd_report(args) -> int:
    src = Path(args.input)
    missing = [s for s in SECTIONS if not (src / f"{s}.csv").exists()]
    if missing:
        print(f"missing sections in {src}: {', '.join(missing)}", file=sys.stderr)
        return 1
    h = {s: read_table_header(src / f"{s}.csv") for s in SECTIONS}
    lines = [f"trendlab {__version__} analysis summary", ""]

    g = h["gamma"]
    slope, r2 = _f(g, "slope"), _f(g, "r_squared")
    lines += [
        "[gamma] novelty decay power law",
        f"  slope = {slope:.4f}, R^2 = {r2:.4f}, window = [{g.get('window_lo')}, {g.get('window_hi')}]",
        f"  reference: {REFERENCE_GAMMA}",
        f"  check slope in [-1.1, -0.9] and R^2 >= 0.95: {_check(-1.1 <= slope <= -0.9 and r2 >= 0.95)}",
        "",
    ]

    r = h["ratios"]
    lines.append("[ratios] log cumulative ratios")
    pairs = sorted({k.split(".")[0] for k in r})
    for pair in pairs:
        sk, ku, dev = _f(r, f"{pair}.skewness"), _f(r, f"{pair}.excess_kurtosis"), _f(r, f"{pair}.qq_max_dev")
        ok = abs(sk) < 0.15 and abs(ku) < 0.3 and dev < 0.15
        lines.append(
            f"  pair {pair}: n = {r.get(pair + '.n')}, skewness = {sk:.4f}, excess kurtosis = {ku:.4f}, "
            f"Q-Q max deviation = {dev:.4f}: {_check(ok)}"
        )
    lines.append("")

    c = h["curvature"]
    dev = _f(c, "max_abs_mean_from_t")
    lines += [
        "[curvature] mean normalized second derivative",
        f"  max |mean| for t >= {c.get('from_t')}: {dev:.5f}",
        f"  check within +-0.02: {_check(dev <= 0.02)}",
        "",
    ]

    d = h["durations"]
    p, tr2 = _f(d, "p_hat"), _f(d, "r_squared")
    lines += [
        "[durations] geometric trending time",
        f"  p_hat = {p:.4f}, mean = {_f(d, 'mean'):.4f}, n = {d.get('n')}, censored = {d.get('censored')}",
        f"  log-density slope = {_f(d, 'slope'):.4f}, R^2 = {tr2:.4f}",
        f"  reference: geometric {REFERENCE_GEOMETRIC}; log-density fit {REFERENCE_TAIL}",
        f"  check log-density R^2 >= 0.9: {_check(tr2 >= 0.9)}",
        "",
    ]

    s = h["sequences"]
    lines += [
        "[sequences] trend sequences",
        f"  topics = {s.get('n_topics')}, sequences = {s.get('n_sequences')}, "
        f"multi-sequence fraction = {_f(s, 'multi_sequence_fraction'):.4f}",
        "  reference: 3468 titles -> 6084 sequences, about 34% of topics in more than one sequence",
        "",
    ]

    m = h["metrics"]
    lines.append("[metrics] correlations (reference values are dataset facts, not checks)")
    for name, ref in REFERENCE_CORRELATIONS.items():
        val = _f(m, f"corr.{name}")
        note = m.get(f"flag.{name}")
        text = "undefined" if np.isnan(val) else f"{val:.4f}"
        lines.append(f"  {name}: {text} (reference {ref})" + (f" [{note}]" if note else ""))
    lines.append(f"  retweet fraction: {_f(m, 'retweet_fraction'):.4f} (reference 31%)")

    target = Path(args.out) if args.out else src / "summary.txt"
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trendlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trendlab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a cohort of topics")
    sim.add_argument("--topics", type=int, default=500)
    sim.add_argument("--intervals", type=int, default=96)
    sim.add_argument("--n0", type=float, default=5.0)
    sim.add_argument("--gamma-c", type=float, default=1.0)
    sim.add_argument("--sigma2", type=float, default=None, help="noise variance (0.25, or 0 for degenerate)")
    sim.add_argument("--theta", type=float, default=1.05)
    sim.add_argument("--stop-p", type=float, default=None, help="set theta from a per-step stop probability")
    sim.add_argument("--noise", choices=[k.value for k in NoiseKind], default="lognormal")
    sim.add_argument("--seed", type=int, default=None, help="defaults to $TRENDLAB_SEED, then 0")
    sim.add_argument("--burn-in", type=int, default=10)
    sim.add_argument("--constant-gamma-after", type=int, default=None)
    sim.add_argument("--authors", type=int, default=1000)
    sim.add_argument("--retweet-prob", type=float, default=0.31)
    sim.add_argument("--no-stream", action="store_true", help="skip writing the tweet stream")
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="run one analysis (or all) over simulated or ingested data")
    ana.add_argument("what", choices=SECTIONS + ("all",))
    ana.add_argument("--in", dest="input", required=True)
    ana.add_argument("--out", required=True)
    ana.add_argument("--window", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    ana.add_argument("--pairs", default=DEFAULT_PAIRS, help="t_i:t_j pairs, comma separated")
    ana.add_argument("--grid", type=int, default=200)
    ana.add_argument("--from-t", type=int, default=5)
    ana.add_argument("--long-min", type=int, default=FOUR_HOURS + 1)
    ana.add_argument("--truncation", type=int, default=0)
    ana.add_argument("--k", type=int, default=100)
    ana.set_defaults(func=cmd_analyze)

    rep = sub.add_parser("report", help="collate an analysis directory into one summary")
    rep.add_argument("--in", dest="input", required=True)
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (TrendlabError, OSError, ValueError) as exc:
        print(f"trendlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
