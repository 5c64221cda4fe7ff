import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sepnets import load_bundled  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def airport():
    """Three-variable net: S scenario, T and P preferences."""
    return load_bundled("airport")


@pytest.fixture
def airport_sep():
    """Same net with T treated as part of the scenario."""
    return load_bundled("airport_sep")


def fixture_text(name: str) -> str:
    with open(os.path.join(FIXTURES, name), encoding="utf-8") as fh:
        return fh.read()


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def record_criterion(request):
    """Log one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_CRITERIA, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
