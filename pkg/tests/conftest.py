import numpy as np
import pytest

from slpris.channel import ChannelSet
from slpris.slp import QPSK


def cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_channels(rng, M, K, N, ris_gain=1.0):
    return ChannelSet(cgauss(rng, K, M), ris_gain * cgauss(rng, N, M), cgauss(rng, K, N))


def random_symbols(rng, L, K):
    return QPSK[rng.integers(0, 4, size=(L, K))]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
