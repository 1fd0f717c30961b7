"""Shared pytest plumbing for the suite.

The acceptance tests register one verdict line each; the hook below prints
them as a dedicated section at the end of the run so the ten PASS/FAIL lines
are visible regardless of output capturing.
"""

ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
