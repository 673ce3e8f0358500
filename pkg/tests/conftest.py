# collects the one-line acceptance verdicts recorded via record_property("acceptance", ...)
_LINES: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "acceptance":
            _LINES[report.nodeid] = value


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_LINES.values(), key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
