import numpy as np
import pytest

from trendlab.core import ModelParams
from trendlab.sim import simulate_cohort

REFERENCE = dict(n_topics=5000, n_intervals=96, n0=1.0, gamma_scale=1.0, sigma2=0.25, seed=20101001)

# (author, retweets, topics, ratio) reference retweet table
TABLE_1 = [
    ("vovo_panico", 11688, 65, 179.81),
    ("cnnbrk", 8444, 84, 100.52),
    ("keshasuja", 5110, 51, 100.19),
    ("LadyGonga", 4580, 54, 84.81),
    ("BreakingNews", 8406, 100, 84.06),
    ("MLB", 3866, 62, 62.35),
    ("nytimes", 2960, 59, 50.17),
    ("HerbertFromFG", 2693, 58, 46.43),
    ("espn", 2371, 66, 35.92),
    ("globovision", 2668, 75, 35.57),
    ("huffingtonpost", 2135, 63, 33.88),
    ("skynewsbreak", 1664, 52, 32.0),
    ("el_pais", 1623, 52, 31.21),
    ("stcom", 1255, 51, 24.60),
    ("la_patilla", 1273, 65, 19.58),
    ("reuters", 957, 57, 16.78),
    ("WashingtonPost", 929, 60, 15.48),
    ("bbcworld", 832, 59, 14.10),
    ("CBSnews", 547, 56, 9.76),
    ("TelegraphNews", 464, 79, 5.87),
    ("tweetmeme", 342, 97, 3.52),
    ("nydailynews", 173, 51, 3.39),
]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo checks over thousands of topics")


@pytest.fixture(scope="session")
def reference_cohort():
    """5000 lognormal topics, sigma2 = 0.25, gamma(t) = 1/t, 96 intervals."""
    series, _ = simulate_cohort(ModelParams(**REFERENCE))
    return series


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def build_table1_stream():
    """Retweet records realising each author's (retweets, topics) pair from TABLE_1."""
    from trendlab.core import TweetRecord

    records = []
    clock = 0
    for author, retweets, topics, _ in TABLE_1:
        base, extra = divmod(retweets, topics)
        for j in range(topics):
            for _ in range(base + (j < extra)):
                records.append(TweetRecord(f"trend-{j}", f"fan-{clock % 997}", clock, True, author))
                clock += 1
    return records


@pytest.fixture(scope="session")
def table1_stream():
    return build_table1_stream()


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the lines are repeated in the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance")
    for _, line in sorted(_VERDICTS):
        terminalreporter.write_line(line)
