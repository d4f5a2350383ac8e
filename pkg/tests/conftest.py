import numpy as np
import pytest

from apfkit.apf import CurveSample


def constant_curves(levels, window=(0.0, 1.0), n_grid=11):
    return [CurveSample(window, np.full(n_grid, float(v))) for v in levels]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
