import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE, key=lambda r: str(r[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")
