import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion gate")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    entry = _RESULTS.setdefault(mark.args[0], {"title": mark.args[1], "runs": []})
    entry["runs"].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, entry in sorted(_RESULTS.items()):
        failed = [name for name, ok in entry["runs"] if not ok]
        line = f"criterion {num:>2}  {'FAIL' if failed else 'PASS'}  {entry['title']}"
        if failed:
            line += f"  [failed: {', '.join(failed)}]"
        terminalreporter.write_line(line)
