import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> detail line, filled by test_acceptance.py
ACCEPTANCE_DETAILS = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_DETAILS


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for kind in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(kind, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            k = int(nodeid.split("test_criterion_")[1][:2])
            if kind != "passed" or k not in outcomes:
                outcomes[k] = "PASS" if kind == "passed" else "FAIL"
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(outcomes):
        terminalreporter.write_line(f"criterion {k:2d}: {outcomes[k]}  {ACCEPTANCE_DETAILS.get(k, '')}")
