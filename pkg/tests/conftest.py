from __future__ import annotations

import os
import re

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion and fail the test if it is not met.

    ``checks`` maps a short label to ``(passed, message)``.
    """

    def record(name: str, checks: dict[str, tuple[bool, str]]) -> None:
        ok = all(passed for passed, _ in checks.values())
        detail = "; ".join(f"{k}: {'ok' if p else 'FAIL'} ({msg})" for k, (p, msg) in checks.items())
        _CRITERIA[name] = f"{name} {'PASS' if ok else 'FAIL'}  {detail}"
        print(_CRITERIA[name])
        failed = [k for k, (p, _) in checks.items() if not p]
        assert not failed, f"{name} not met: {', '.join(failed)}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: int(re.sub(r"\D", "", s) or 0)):
        terminalreporter.write_line(_CRITERIA[name])
