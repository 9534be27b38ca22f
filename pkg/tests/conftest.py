import _criteria


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _criteria.RESULTS:
        line = "%s: %s" % (name, "PASS" if passed else "FAIL")
        if detail:
            line += " (%s)" % detail
        terminalreporter.write_line(line)
