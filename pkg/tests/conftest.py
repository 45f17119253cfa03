import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


BUDGET = 60.0


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's verdict; printed in the summary.

    A criterion that passes its assertions but overruns the 60 second
    budget is reported as FAIL and errors at teardown.
    """
    def record(number: int, title: str):
        _CRITERIA[number] = (title, False, request.node.nodeid)
        return number
    t0 = time.perf_counter()
    yield record
    elapsed = time.perf_counter() - t0
    for number, (title, _, nodeid) in list(_CRITERIA.items()):
        if nodeid == request.node.nodeid:
            failed = getattr(request.node, "_failed", True) or elapsed >= BUDGET
            _CRITERIA[number] = (f"{title}  [{elapsed:.1f}s]", not failed, nodeid)
    if elapsed >= BUDGET:
        pytest.fail(f"took {elapsed:.1f}s, over the {BUDGET:.0f}s budget")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._failed = not rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, _ = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
