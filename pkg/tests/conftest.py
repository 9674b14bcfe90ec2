import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and fail the test when it fails."""

    def record(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}" + (f": {detail}" if detail else "")
        ACCEPTANCE.append((number, line))
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
