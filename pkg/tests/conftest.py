"""Shared fixtures and the per-criterion acceptance report."""

ACCEPTANCE_LINES: dict[str, str] = {}


def report(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
