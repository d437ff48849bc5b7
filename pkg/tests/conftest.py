import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def exact_discrete_cdf(probabilities, k):
    """P(D <= k) by inclusion-exclusion over the set of still-missing real types.

    P(all real types seen in k draws) = sum_S (-1)^|S| (1 - sum_{i in S} p_i)^k.
    """
    rates = np.asarray(probabilities, dtype=float)[1:]
    k = np.asarray(k, dtype=float)
    total = np.zeros(k.shape)
    for r in range(len(rates) + 1):
        for subset in itertools.combinations(range(len(rates)), r):
            total += (-1) ** r * (1.0 - rates[list(subset)].sum()) ** k
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
