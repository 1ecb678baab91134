import pytest

RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    def _record(label: str, ok: bool, detail: str = "") -> None:
        RESULTS.append((label, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {label} {detail}".rstrip())
    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label} {detail}".rstrip())
