import numpy as np
import pytest

from nbarrier.model import LVSystem, load_preset
from nbarrier.tangent import TwoSpeciesParams

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def bistable_pair():
    return LVSystem(d=[1, 1], sigma=[1, 1], c=[[1, 2], [2, 1]])


@pytest.fixture
def may_leonard():
    return load_preset("may_leonard")


@pytest.fixture
def lv4():
    return load_preset("lv4_may_leonard")


@pytest.fixture
def symmetric():
    """alpha = beta = k = 1, a1 = a2 = 2, d = 1."""
    return TwoSpeciesParams(alpha=1, beta=1, d=1, k=1, a1=2, a2=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
