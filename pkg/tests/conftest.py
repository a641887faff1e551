import numpy as np
import pytest

from ncmult.operator_model import AlgebraModel, Factor, OperatorElement


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def diag21():
    return AlgebraModel((Factor(2, 1.0),)), OperatorElement((np.diag([2.0, 1.0]),))


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE_LINES]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
