import os

# keep Monte Carlo tests single-process unless the caller asks otherwise
os.environ.setdefault("LEVYLAB_THREADS", "1")

CRITERIA_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
