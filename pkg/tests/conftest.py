import numpy as np
import pytest

from tomoprob.states import PositionGrid

# Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def grid():
    return PositionGrid(-10.0, 10.0, 1001)


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def random_pure(rng, n, support=None):
    k = support or n
    v = np.zeros(n, dtype=complex)
    v[:k] = rng.normal(size=k) + 1j * rng.normal(size=k)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())
