import numpy as np
import pytest

from corrgen.path import straight_path
from corrgen.scenes import FIXTURES


@pytest.fixture(scope="session")
def unit_path():
    return straight_path([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])


@pytest.fixture(scope="session")
def cylinder():
    fx = FIXTURES["cylinder"]
    path, cloud = fx.build()
    return path, cloud, fx.wrapper_radius


@pytest.fixture(scope="session")
def mixed():
    fx = FIXTURES["mixed"]
    path, cloud = fx.build()
    return path, cloud, fx.wrapper_radius


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def criterion_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(_CRITERIA, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
