import pytest

CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        CRITERIA[label] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(CRITERIA, key=lambda s: (int(s.split()[1].rstrip("ab")), s)):
        ok, detail = CRITERIA[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
