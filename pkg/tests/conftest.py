"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
from collections import defaultdict

import pytest

_OUTCOMES: dict = defaultdict(list)


class AcceptanceLog:
    """Records ``(criterion, passed, detail)`` for the terminal summary."""

    def __call__(self, criterion: int, passed: bool, detail: str) -> bool:
        _OUTCOMES[criterion].append((bool(passed), detail))
        print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
        return bool(passed)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_OUTCOMES):
        parts = _OUTCOMES[crit]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
