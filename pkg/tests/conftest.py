import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())

# Acceptance tests append (name, passed, detail) here; printed in the summary.
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
