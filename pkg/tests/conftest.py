import functools
import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from fieldcon.dirac import analyze_model
from fieldcon.presets import preset_model

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

# derandomized so two runs of the suite make identical choices
settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@functools.lru_cache(maxsize=None)
def preset_analysis(name: str):
    m, gauge = preset_model(name)
    return analyze_model(m, gauge)


@pytest.fixture(scope="session")
def analysis():
    return preset_analysis


@pytest.fixture(scope="session")
def reference():
    return json.loads((DATA / "reference_tables.json").read_text())


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """Record ``(criterion, passed, detail)``; printed in the terminal summary."""

    def log(number: int, passed: bool, detail: str) -> None:
        _ACCEPTANCE[number] = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {detail}"

    return log


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
