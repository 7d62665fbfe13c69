import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# acceptance outcomes, keyed by criterion number
ACCEPTANCE = {}


def pytest_configure(config):
    for n in range(1, 11):
        config.addinivalue_line("markers", f"criterion_{n}: acceptance criterion {n}")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark in report.keywords:
        if mark.startswith("criterion_"):
            n = int(mark.split("_")[1])
            prev = ACCEPTANCE.get(n, "PASS")
            ACCEPTANCE[n] = "FAIL" if report.outcome != "passed" or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    from acceptance_log import DETAILS
    for n in sorted(ACCEPTANCE):
        detail = "; ".join(DETAILS.get(n, []))
        terminalreporter.write_line(f"criterion {n:2d}: {ACCEPTANCE[n]}"
                                    + (f"  ({detail})" if detail else ""))


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20240601)
