import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance"):
            lines = getattr(mod, "_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        key = lambda s: int(s.split("criterion")[1].split(":")[0])
        for line in sorted(lines, key=key):
            terminalreporter.write_line(line)
