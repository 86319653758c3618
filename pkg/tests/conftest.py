from __future__ import annotations

import _report


def pytest_terminal_summary(terminalreporter):
    if not _report.LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(_report.LINES, key=lambda k: (len(k), k)):
        terminalreporter.write_line(_report.LINES[key])
