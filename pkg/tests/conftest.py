import numpy as np
import pytest

from swaphom import qubit_sim as qs
from swaphom.utils import random_amplitudes

_acceptance_lines = []


def random_state(n, rng):
    return qs.PureState(random_amplitudes(2**n, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    status = "PASS" if report.passed else "FAIL"
    _acceptance_lines.append((number, f"criterion {number:2d}: {status}  {title}"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance_lines):
        terminalreporter.write_line(line)
