import numpy as np
import pytest

from sehp import Cascade, SehpParams


def random_instance(rng, max_events=200, max_beta_T=50.0, alpha_zero=False):
    """Random (params, cascade) with N <= max_events and beta*T <= max_beta_T."""
    T = rng.uniform(0.5, 20.0)
    beta = rng.uniform(0.02, max_beta_T) / T
    alpha = 0.0 if alpha_zero else rng.uniform(0.0, 2.0) * beta
    v = rng.uniform(0.1, 10.0)
    n = int(rng.integers(0, max_events + 1))
    ts = np.sort(rng.uniform(0.0, T, size=n))
    return SehpParams(v, alpha, beta), Cascade(f"r{n}", ts, T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_case():
    """v=1, alpha=0.5, beta=1, T=2, events at 0.5 and 1.0."""
    return SehpParams(1.0, 0.5, 1.0), Cascade("small", [0.5, 1.0], 2.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
