from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mobgraph import build_graph  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def path3():
    return build_graph([("a", "b", 1), ("b", "c", 1)], directed=False)


@pytest.fixture
def cycle3():
    return build_graph([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)], directed=True)


@pytest.fixture
def arc():
    return build_graph([("a", "b", 1)], directed=True)


@pytest.fixture
def acceptance_log():
    def record(number: int, title: str, passed: bool | None, detail: str = "") -> None:
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        line = f"[{status}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
