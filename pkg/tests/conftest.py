import numpy as np
import pytest

from gevrey_lab.suites import random_field


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_field(rng):
    def make(grid, band, slope=0.0):
        return random_field(grid, band, rng, slope)
    return make


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
