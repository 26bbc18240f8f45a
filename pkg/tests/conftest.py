import numpy as np
import pytest

from udlad import _kernels

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(_kernels.BACKENDS))
def backend(request):
    """Run a test once per available kernel backend."""
    previous = _kernels.BACKEND
    _kernels.use(request.param)
    yield request.param
    _kernels.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
