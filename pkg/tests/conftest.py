"""Shared pytest hooks: print the acceptance checklist after the run."""

ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance checklist")
        for line in sorted(ACCEPTANCE_VERDICTS):
            terminalreporter.write_line(line)
