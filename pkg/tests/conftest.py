import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Collect acceptance report lines for the end-of-session summary."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
