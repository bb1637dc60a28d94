import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("default")

np.seterr(all="warn")

_ACCEPTANCE_RESULTS = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def record_criterion(number, name, passed, detail=""):
    _ACCEPTANCE_RESULTS[number] = (name, passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        name, passed, detail = _ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number:2d} {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
