import numpy as np
import pytest

from emothresh._backend import BACKENDS
from emothresh.image_io import Histogram, ProbDist, normalize
from emothresh.suite import load_suite

ALL_BACKENDS = ["python", "cython"]


def dist_from(mapping):
    p = np.zeros(256)
    for b, w in mapping.items():
        p[b] = w
    return ProbDist(p / p.sum())


@pytest.fixture(scope="session")
def suite():
    return load_suite()


@pytest.fixture(scope="session")
def suite_dists(suite):
    return {name: normalize(h) for name, h in suite.items()}


@pytest.fixture
def two_impulse():
    return dist_from({50: 0.5, 200: 0.5})


@pytest.fixture
def three_impulse():
    return dist_from({40: 1, 120: 1, 220: 1})


@pytest.fixture
def uniform():
    return ProbDist(np.full(256, 1 / 256))


@pytest.fixture(params=ALL_BACKENDS)
def backend(request):
    if request.param not in BACKENDS:
        pytest.skip("compiled kernels not built")
    return request.param


def counts_hist(mapping):
    c = np.zeros(256, dtype=np.int64)
    for b, n in mapping.items():
        c[b] = n
    return Histogram(c)


_CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA_KEY] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""
    log = request.config.stash[_CRITERIA_KEY]

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        log[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_CRITERIA_KEY, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for number in sorted(log):
            terminalreporter.write_line(log[number])
