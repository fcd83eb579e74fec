import numpy as np
import pytest

from lvaluelab.lfunc_registry import make_dirichlet, make_tuple, make_zeta


@pytest.fixture(scope="session")
def zeta():
    return make_zeta()


@pytest.fixture(scope="session")
def chi4():
    return make_dirichlet(4, 1)


@pytest.fixture(scope="session")
def zeta_tuple(zeta):
    return make_tuple([zeta], [0.0])


@pytest.fixture(scope="session")
def pair_tuple(zeta, chi4):
    return make_tuple([zeta, chi4], [0.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
