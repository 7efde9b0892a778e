import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from herzlab.grid import GridSpec, build_grid

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def grid1():
    return build_grid(GridSpec(1, 0, 3, 16))


@pytest.fixture
def grid2():
    return build_grid(GridSpec(2, 1, 3, 4))



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
