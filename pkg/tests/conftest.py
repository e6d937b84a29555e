import time

import pytest

_START = time.perf_counter()
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args
    ok = rep.passed if rep.when == "call" else False
    details = [v for k, v in item.user_properties if k == "detail"]
    prev = _CRITERIA.get(number)
    if prev is not None:
        ok = ok and prev[1]
        details = prev[2] + details
    _CRITERIA[number] = (title, ok, details)


@pytest.fixture
def detail(request):
    """Record a measured value for the criterion summary line."""
    def add(text):
        request.node.user_properties.append(("detail", text))
    return add


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, details = _CRITERIA[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
    terminalreporter.write_line(f"total session time {time.perf_counter() - _START:.1f} s")
