"""Shared pytest wiring.

The acceptance module records one PASS/FAIL line per criterion; this hook
replays them in the terminal summary so the verdict survives pytest's
output capture.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for name, module in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] != "test_acceptance":
            continue
        lines = getattr(module, "SUMMARY", None)
        if lines:
            terminalreporter.section("acceptance criteria")
            for line in lines:
                terminalreporter.write_line(line)
