import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def record():
    """Store the summary line for one acceptance criterion."""

    def put(n: int, ok: bool, detail: str) -> None:
        _LINES[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"

    return put


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
