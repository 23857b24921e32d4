import pytest

from gencesaro.weights import MomentTable, parse_weight

_TABLES: dict = {}

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def table():
    """Session-wide moment tables so expensive quadrature runs once per weight."""

    def get(w):
        if isinstance(w, str):
            w = parse_weight(w)
        return _TABLES.setdefault(w.weight_id, MomentTable(w.weight_id))

    return get


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}"
        if detail:
            line += f" | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
