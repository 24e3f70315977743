import numpy as np
import pytest

from spatconf.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(20240611, 0)


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (float(str(k).rstrip("abcdefghijklmnopqrstuvwxyz")), str(k))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
