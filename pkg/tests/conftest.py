import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nmekit import _kernels

settings.register_profile("nmekit", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("nmekit")

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def _compiled():
    # JIT compilation happens once here so timed sections measure steady state
    _kernels.warmup()
    if _kernels.numba_kernels is not None:
        _kernels.warmup(_kernels.numba_kernels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
