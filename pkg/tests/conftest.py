import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "awp", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("awp")

LAMBDA_P, LAMBDA_S, LAMBDA_I = 405e-9, 780e-9, 840e-9
K_P = 2 * math.pi / LAMBDA_P
K_S = 2 * math.pi / LAMBDA_S
K_I = 2 * math.pi / LAMBDA_I

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
