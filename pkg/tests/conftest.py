import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ofdma_cfo.numerics import RngStream
from ofdma_cfo.waveform import OfdmaConfig, build_allocation

settings.register_profile(
    "repo", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

FIG2_CFOS = (0.20, -0.35, 0.45, -0.11)
FIG3_CFOS = (-0.44, 0.09, -0.34, 0.18)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fig2_cfg():
    return OfdmaConfig(32, 4, 16, 4, 8)


@pytest.fixture
def fig2_alloc(fig2_cfg):
    return build_allocation("generalized", fig2_cfg, RngStream(2, 0))


@pytest.fixture
def fig3_cfg():
    return OfdmaConfig(128, 4, 32, 7, 14)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
