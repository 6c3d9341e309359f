import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = {}


class Criterion:
    def __init__(self):
        self.detail = ""

    def __call__(self, detail):
        self.detail = detail


@pytest.fixture
def criterion():
    """Acceptance tests pass a one-line summary of what they measured."""
    return Criterion()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    if mark is None or call.when != "call":
        return
    report = outcome.get_result()
    rec = item.funcargs.get("criterion")
    detail = rec.detail if rec else ""
    if report.failed and call.excinfo is not None:
        detail = f"{detail} [{call.excinfo.typename}: {str(call.excinfo.value).splitlines()[0]}]"
    status = "PASS" if report.passed else "FAIL"
    num, title = mark.args
    _ACCEPTANCE[num] = f"{status} {num:>2}. {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
