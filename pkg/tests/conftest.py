import pytest

# (number, title, passed, detail) rows filled in by the acceptance suite
ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance():
    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        ACCEPTANCE_RESULTS.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line)
