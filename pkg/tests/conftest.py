from pathlib import Path

import pytest

from combdist.inference import FrequencyTable, Hyperparams, sufficient_stats, update_batch

DATA = Path(__file__).resolve().parent.parent / "data"

SOYBEAN_COUNTS = (0, 2, 2, 5, 5, 3, 3)


@pytest.fixture(scope="session")
def soybean():
    return FrequencyTable(6, SOYBEAN_COUNTS)


@pytest.fixture(scope="session")
def soybean_hyper(soybean):
    return update_batch(Hyperparams(m=6), sufficient_stats(soybean))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
