"""Print one pass/fail line per acceptance criterion at the end of the run."""

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    failed = report.failed and not hasattr(report, "wasxfail")
    if report.when == "call" or failed:
        status = "FAIL" if failed else ("SKIP" if report.skipped else "PASS")
        if _ACCEPTANCE.get(name) != "FAIL":
            _ACCEPTANCE[name] = status


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{status} {name}")
