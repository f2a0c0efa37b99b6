import pytest

_OUTCOMES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    key = mark.args
    # a criterion passes only if every test carrying it passes
    if rep.when == "setup" and rep.failed:
        _OUTCOMES[key] = False
    elif rep.when == "call":
        _OUTCOMES[key] = _OUTCOMES.get(key, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), passed in sorted(_OUTCOMES.items()):
        terminalreporter.write_line(f"criterion {number:2d}  {'PASS' if passed else 'FAIL'}  {title}")
