import numpy as np
import pytest

from qrtkit import channels as ch
from qrtkit.theories import athermality_theory, coherence_theory, gibbs_state


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def coherence():
    return coherence_theory(2)


@pytest.fixture(scope="session")
def athermality():
    return athermality_theory(gibbs_state([0.0, 1.0], beta=1.0))


@pytest.fixture
def qubit_channel():
    return ch.random_channel(2, 2, 4, seed=7)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(number, title, passed, detail=""):
        _ACCEPTANCE_LINES.append((number, f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  {detail}"))
        print(_ACCEPTANCE_LINES[-1][1])
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
