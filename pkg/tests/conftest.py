import numpy as np
import pytest

from bertrand.spaces import BertrandParams

# lines appended by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def kepler():
    """Euclidean Kepler with the attractive sign."""
    return BertrandParams.type1(n=1, m=1, K=0.0, amplitude=-1.0)


@pytest.fixture
def repulsive_kepler():
    return BertrandParams.type1(n=1, m=1, K=0.0, amplitude=1.0)


@pytest.fixture
def oscillator():
    """Euclidean isotropic oscillator ``V = r^2 / 2``."""
    return BertrandParams.type2(n=2, m=1, K=0.0, D=0.0, branch=1, amplitude=-1.0)
