import numpy as np
import pytest

from gane.envs import SPECS

ENV_NAMES = [spec.name for spec in SPECS.values()]

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record_criterion(number, title, passed, detail=""):
    ACCEPTANCE[number] = (title, bool(passed), detail)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
