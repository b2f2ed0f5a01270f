import numpy as np
import pytest

from tripletag.tagging import Sentiment, Span, Triplet

EXAMPLE_TOKENS = "food was so so but excited to see many vegan options".split()
EXAMPLE_TRIPLETS = {
    Triplet(Span(0, 0), Span(2, 3), Sentiment.NEUTRAL),
    Triplet(Span(9, 10), Span(5, 5), Sentiment.POSITIVE),
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def example_tokens():
    return list(EXAMPLE_TOKENS)


@pytest.fixture
def example_triplets():
    return set(EXAMPLE_TRIPLETS)


# acceptance results, printed as one line per criterion at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
