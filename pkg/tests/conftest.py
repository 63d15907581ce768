import pytest

CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    def rec(n, ok, detail=""):
        CRITERIA[n] = (bool(ok), detail)
        print(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return rec
