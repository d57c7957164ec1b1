import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one of the numbered acceptance criteria")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        measured = "; ".join(str(v) for k, v in item.user_properties if k == "measured")
        _OUTCOMES[number] = (title, report.outcome == "passed", measured)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, ok, measured = _OUTCOMES[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}"
        if measured:
            line += f" [{measured}]"
        terminalreporter.write_line(line)
