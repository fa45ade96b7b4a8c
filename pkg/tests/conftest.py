"""Shared acceptance-verdict reporting.

The acceptance tests each announce one criterion verdict.  Inline prints
are swallowed by output capture on passing tests, so verdicts are also
collected and replayed in a terminal section after the run, where they
are always visible.
"""
import pytest

_verdicts: list[str] = []


@pytest.fixture
def announce():
    def _announce(tag: str, ok: bool, detail: str):
        line = f"[{tag}] {'PASS' if ok else 'FAIL'}: {detail}"
        _verdicts.append(line)
        print(line)
        assert ok, line

    return _announce


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)
