import pytest

from fifosim import validate_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def e1_grid():
    return validate_grid(1, [1, 2], [2, 4])


@pytest.fixture
def e2_grid():
    return validate_grid(1, [1], [4, 8])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
