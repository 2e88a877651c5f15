import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record the one-line verdict for an acceptance criterion."""

    def record(n: int, ok: bool, detail: str, status: str | None = None) -> None:
        _ACCEPTANCE[n] = f"criterion {n:>2}: {status or ('PASS' if ok else 'FAIL')}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in range(1, 11):
        terminalreporter.write_line(_ACCEPTANCE.get(n, f"criterion {n:>2}: FAIL  did not run to completion"))
